#include "trendmct/tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "trendmct/errors.hpp"
#include "trendmct/isotonic.hpp"
#include "trendmct/rng.hpp"
#include "trendmct/special_functions.hpp"

namespace trendmct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OneWayLayout negated(const OneWayLayout& layout) {
    OneWayLayout out = layout;
    for (auto& group : out.responses)
        for (double& v : group) v = -v;
    return out;
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

struct ContrastComponents {
    std::vector<double> estimates;   // c_h' m
    std::vector<double> scales;      // studentizing denominators
    std::vector<double> statistics;  // estimates / scales
};

// Mirrors contrast_statistics() exactly (same accumulation order) while also
// exposing the estimate/scale split needed for confidence intervals.
ContrastComponents contrast_components(const GroupEstimates& est, const ContrastMatrix& cm,
                                       Estimand estimand, StudentizeMode studentize) {
    const std::size_t k = est.means.size();
    if (cm.k() != k) throw DataError("mct: contrast/estimate dimension mismatch");

    std::vector<double> m = est.means;
    if (estimand == Estimand::PavaMeans) {
        std::vector<double> weights(k);
        for (std::size_t i = 0; i < k; ++i) weights[i] = static_cast<double>(est.group_sizes[i]);
        m = pava(m, weights, Direction::Increasing).fitted;
    }

    ContrastComponents out;
    out.estimates.resize(cm.xi());
    out.scales.resize(cm.xi());
    out.statistics.resize(cm.xi());
    for (std::size_t h = 0; h < cm.xi(); ++h) {
        double numerator = 0.0;
        double variance = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double c = cm.coefficients[h][i];
            numerator += c * m[i];
            variance += c * c * est.mean_variances[i];
        }
        const double denom = studentize == StudentizeMode::SigmaOnly
                                 ? std::sqrt(est.pooled_s2)
                                 : std::sqrt(variance);
        if (!(denom > 0.0)) throw DataError("mct: degenerate contrast variance");
        out.estimates[h] = numerator;
        out.scales[h] = denom;
        out.statistics[h] = numerator / denom;
    }
    return out;
}

// Adjusted p-value via a single rectangle of the xi-variate reference
// distribution at the observed statistic.
ProbabilityEstimate reference_rectangle(double threshold, Sides sides,
                                        const CorrelationMatrix& R, int df,
                                        const MvtOptions& options) {
    MvtProblem problem;
    problem.correlation = R;
    problem.df = df;
    problem.options = options;
    const std::size_t xi = R.dim();
    if (sides == Sides::OneSided) {
        problem.lower.assign(xi, -kInf);
        problem.upper.assign(xi, threshold);
    } else {
        const double bound = std::fabs(threshold);
        if (bound == 0.0) return ProbabilityEstimate{};  // empty rectangle: p = 1
        problem.lower.assign(xi, -bound);
        problem.upper.assign(xi, bound);
    }
    return mvt_rectangle(problem);
}

// Core min-p MCT on data already oriented for an increasing alternative.
TestReport mct_core(const OneWayLayout& layout, const TestSpec& spec,
                    const ContrastMatrix& cm, Estimand estimand) {
    const GroupEstimates est = summarize(layout, spec.variance_mode, spec.hc);
    const ContrastComponents comp =
        contrast_components(est, cm, estimand, spec.studentize);
    const CorrelationMatrix R = contrast_correlation(
        cm, std::span<const double>(est.mean_variances));

    // Arithmetic-mean contrasts are jointly multivariate t with the residual
    // degrees of freedom; the order-restricted (PAVA) family is referenced
    // against absolute coordinates of the normal limit.
    const bool pava_family = estimand == Estimand::PavaMeans;
    const int ref_df = pava_family ? 0 : est.df;

    TestReport report;
    report.method = spec;
    report.df = est.df;
    report.statistics = comp.statistics;
    report.adjusted_p.resize(comp.statistics.size());
    for (std::size_t h = 0; h < comp.statistics.size(); ++h) {
        const double t = comp.statistics[h];
        const double threshold =
            (pava_family && spec.sides == Sides::OneSided) ? std::fabs(t) : t;
        const ProbabilityEstimate rect =
            reference_rectangle(threshold, spec.sides, R, ref_df, spec.mvt);
        report.adjusted_p[h] = clamp01(1.0 - rect.value);
        report.mvt_error_bound = std::max(report.mvt_error_bound, rect.error_bound);
    }
    report.global_p =
        *std::min_element(report.adjusted_p.begin(), report.adjusted_p.end());

    if (!pava_family) {
        const double q = mvt_equicoordinate_quantile(1.0 - spec.alpha, R, ref_df,
                                                     spec.sides, 1e-3, spec.mvt);
        std::vector<std::array<double, 2>> intervals(comp.statistics.size());
        for (std::size_t h = 0; h < comp.statistics.size(); ++h) {
            const double center = comp.estimates[h];
            const double margin = q * comp.scales[h];
            intervals[h] = {center - margin,
                            spec.sides == Sides::OneSided ? kInf : center + margin};
        }
        report.confidence_intervals = std::move(intervals);
    }
    return report;
}

// Map a report computed on negated data back to the original scale.
TestReport mirror_back(TestReport report) {
    for (double& t : report.statistics) t = -t;
    if (report.confidence_intervals) {
        for (auto& ci : *report.confidence_intervals) ci = {-ci[1], -ci[0]};
    }
    return report;
}

ContrastMatrix family_contrasts(TestFamily family, const std::vector<int>& sizes) {
    switch (family) {
        case TestFamily::WilliamsMCT:
            return williams_contrasts(sizes);
        case TestFamily::GrandMeanMCT:
        case TestFamily::GrandMeanMCTPava:
            return grand_mean_contrasts(sizes);
        default:
            throw ConfigError("mct: family has no built-in contrast matrix");
    }
}

// Between-group sum of squares of the order-restricted fit around the grand
// mean; shares its denominator (total sum of squares) with every permuted
// replicate, so comparisons can use numerators alone.
double restricted_between_ss(const std::vector<double>& means,
                             const std::vector<double>& weights, double grand,
                             Direction direction) {
    const IsotonicFit fit =
        pava(std::span<const double>(means), std::span<const double>(weights), direction);
    double ss = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double d = fit.fitted[i] - grand;
        ss += weights[i] * d * d;
    }
    return ss;
}

}  // namespace

std::string family_name(TestFamily family) {
    switch (family) {
        case TestFamily::AnovaF: return "anova-f";
        case TestFamily::GrandMeanMCT: return "grand-mean-mct";
        case TestFamily::GrandMeanMCTPava: return "grand-mean-mct-pava";
        case TestFamily::WilliamsMCT: return "williams-mct";
        case TestFamily::BartholomewPermutation: return "bartholomew-permutation";
    }
    return "unknown";
}

TestReport anova_f(const OneWayLayout& layout) {
    const GroupEstimates est = summarize(layout, VarianceMode::Pooled);
    if (!(est.pooled_s2 > 0.0))
        throw DataError("anova: zero within-group variance; F statistic undefined");

    const std::size_t k = est.means.size();
    double between = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = est.means[i] - est.grand_mean;
        between += static_cast<double>(est.group_sizes[i]) * d * d;
    }
    const double f = between / static_cast<double>(k - 1) / est.pooled_s2;
    const double p = clamp01(1.0 - f_cdf(f, static_cast<double>(k - 1),
                                         static_cast<double>(est.df)));

    TestReport report;
    report.method.family = TestFamily::AnovaF;
    report.df = est.df;
    report.statistics = {f};
    report.adjusted_p = {p};
    report.global_p = p;
    return report;
}

TestReport mct(const OneWayLayout& layout, const TestSpec& spec) {
    layout.validate();
    const Estimand estimand = spec.family == TestFamily::GrandMeanMCTPava
                                  ? Estimand::PavaMeans
                                  : Estimand::ArithmeticMeans;
    if (spec.family == TestFamily::AnovaF ||
        spec.family == TestFamily::BartholomewPermutation)
        throw ConfigError("mct: not a contrast-test family");

    if (spec.direction == Direction::Decreasing) {
        const OneWayLayout flipped = negated(layout);
        const ContrastMatrix cm = family_contrasts(spec.family, flipped.group_sizes());
        return mirror_back(mct_core(flipped, spec, cm, estimand));
    }
    const ContrastMatrix cm = family_contrasts(spec.family, layout.group_sizes());
    return mct_core(layout, spec, cm, estimand);
}

TestReport mct_with_contrasts(const OneWayLayout& layout, const TestSpec& spec,
                              const ContrastMatrix& cm) {
    layout.validate();
    if (spec.direction == Direction::Decreasing)
        return mirror_back(mct_core(negated(layout), spec, cm, Estimand::ArithmeticMeans));
    return mct_core(layout, spec, cm, Estimand::ArithmeticMeans);
}

double williams_statistic_classic(const OneWayLayout& layout, Direction direction) {
    layout.validate();
    if (direction == Direction::Decreasing)
        return williams_statistic_classic(negated(layout), Direction::Increasing);

    const GroupEstimates est = summarize(layout, VarianceMode::Pooled);
    const int n = est.group_sizes.front();
    for (int size : est.group_sizes)
        if (size != n)
            throw DataError("williams classic statistic requires a balanced design");
    if (!(est.pooled_s2 > 0.0))
        throw DataError("williams: zero within-group variance");

    // Isotonic amalgamation over the dose groups only (control excluded).
    std::vector<double> dose_means(est.means.begin() + 1, est.means.end());
    std::vector<double> weights(dose_means.size(), static_cast<double>(n));
    const IsotonicFit fit = pava(std::span<const double>(dose_means),
                                 std::span<const double>(weights), Direction::Increasing);
    const double top = fit.fitted.back();
    return (top - est.means.front()) /
           std::sqrt(2.0 * est.pooled_s2 / static_cast<double>(n));
}

TestReport bartholomew_permutation(const OneWayLayout& layout, Direction direction,
                                   int permutations, std::uint64_t seed) {
    layout.validate();
    if (permutations < 1)
        throw ConfigError("permutation test: need at least one permutation");

    const std::size_t k = layout.k();
    std::vector<double> pooled;
    std::vector<double> weights(k);
    std::vector<double> means(k);
    double grand = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& x = layout.responses[i];
        weights[i] = static_cast<double>(x.size());
        double sum = 0.0;
        for (double v : x) sum += v;
        means[i] = sum / weights[i];
        grand += sum;
        pooled.insert(pooled.end(), x.begin(), x.end());
    }
    const double total_n = static_cast<double>(pooled.size());
    grand /= total_n;

    double ss_total = 0.0;
    for (double v : pooled) ss_total += (v - grand) * (v - grand);
    if (!(ss_total > 0.0))
        throw DataError("permutation test: all observations identical");

    const double observed_num = restricted_between_ss(means, weights, grand, direction);

    // The grand mean and the total sum of squares are invariant under
    // relabeling, so replicates are compared on the between-group numerator.
    std::vector<double> shuffled(pooled.size());
    std::vector<double> perm_means(k);
    int exceed = 0;
    for (int b = 1; b <= permutations; ++b) {
        shuffled = pooled;
        CounterRng rng({seed, static_cast<std::uint64_t>(b)});
        rng.shuffle(shuffled.data(), shuffled.size());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < k; ++i) {
            double sum = 0.0;
            const std::size_t n_i = layout.responses[i].size();
            for (std::size_t j = 0; j < n_i; ++j) sum += shuffled[pos++];
            perm_means[i] = sum / static_cast<double>(n_i);
        }
        // Direction-free reference: the better of the two monotone fits.
        const double num =
            std::max(restricted_between_ss(perm_means, weights, grand, Direction::Increasing),
                     restricted_between_ss(perm_means, weights, grand, Direction::Decreasing));
        if (num >= observed_num) ++exceed;
    }

    const double p = (1.0 + exceed) / (permutations + 1.0);
    TestReport report;
    report.method.family = TestFamily::BartholomewPermutation;
    report.method.direction = direction;
    report.method.permutations = permutations;
    report.method.perm_seed = seed;
    report.df = static_cast<int>(total_n) - static_cast<int>(k);
    report.statistics = {observed_num / ss_total};
    report.adjusted_p = {p};
    report.global_p = p;
    return report;
}

TestReport run_test(const OneWayLayout& layout, const TestSpec& spec) {
    switch (spec.family) {
        case TestFamily::AnovaF: {
            TestReport report = anova_f(layout);
            report.method = spec;
            report.method.family = TestFamily::AnovaF;
            return report;
        }
        case TestFamily::BartholomewPermutation: {
            TestReport report = bartholomew_permutation(layout, spec.direction,
                                                        spec.permutations, spec.perm_seed);
            report.method = spec;
            report.method.family = TestFamily::BartholomewPermutation;
            return report;
        }
        default:
            return mct(layout, spec);
    }
}

}  // namespace trendmct
