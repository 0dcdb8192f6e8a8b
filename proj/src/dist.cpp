#include "trendmct/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include "trendmct/errors.hpp"
#include "trendmct/rng.hpp"
#include "trendmct/special_functions.hpp"

namespace trendmct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotFloor = 1e-10;   // clamp for singular correlation
constexpr double kPsdTolerance = -1e-8; // pivots below this mean "not PSD"

// Square roots of the first primes: Richtmyer lattice generators. Dimension 0
// is reserved for the radial (chi) variable of the t case.
constexpr double kPrimes[] = {2.0,  3.0,  5.0,  7.0,  11.0, 13.0, 17.0,
                              19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0};

struct PreparedProblem {
    std::vector<double> lower, upper;       // permuted bounds
    std::vector<std::vector<double>> chol;  // lower-triangular factor
    std::size_t dim = 0;
};

double phi_inv_clamped(double p) {
    return norm_quantile(std::min(std::max(p, 1e-16), 1.0 - 1e-16));
}

// Cholesky factorization with greedy variable reordering: at each stage the
// remaining variable with the smallest conditional interval probability is
// integrated next (standard variance-reduction ordering). Singularity is
// absorbed by clamping tiny pivots; genuinely indefinite input throws.
PreparedProblem prepare(const MvtProblem& problem) {
    const std::size_t m = problem.correlation.dim();
    PreparedProblem prep;
    prep.dim = m;
    prep.lower = problem.lower;
    prep.upper = problem.upper;
    std::vector<std::vector<double>> c = problem.correlation.entries;
    auto& a = prep.lower;
    auto& b = prep.upper;
    std::vector<std::vector<double>> L(m, std::vector<double>(m, 0.0));
    std::vector<double> y(m, 0.0);  // truncated-normal expected values

    constexpr double kNormDensityCoef = 0.3989422804014326779;  // 1/sqrt(2*pi)
    for (std::size_t j = 0; j < m; ++j) {
        // Select the hardest remaining variable.
        std::size_t best = j;
        double best_prob = 2.0;
        double best_lo = 0.0, best_hi = 0.0;
        for (std::size_t i = j; i < m; ++i) {
            double accum = 0.0;
            double partial = 0.0;
            for (std::size_t t = 0; t < j; ++t) {
                accum += L[i][t] * y[t];
                partial += L[i][t] * L[i][t];
            }
            const double cond_var = c[i][i] - partial;
            const double sd = std::sqrt(std::max(cond_var, kPivotFloor));
            const double lo = a[i] == -kInf ? -kInf : (a[i] - accum) / sd;
            const double hi = b[i] == kInf ? kInf : (b[i] - accum) / sd;
            const double p_lo = lo == -kInf ? 0.0 : norm_cdf(lo);
            const double p_hi = hi == kInf ? 1.0 : norm_cdf(hi);
            const double prob = p_hi - p_lo;
            if (prob < best_prob) {
                best_prob = prob;
                best = i;
                best_lo = lo;
                best_hi = hi;
            }
        }
        if (best != j) {
            std::swap(a[best], a[j]);
            std::swap(b[best], b[j]);
            std::swap(c[best], c[j]);
            for (std::size_t r = 0; r < m; ++r) std::swap(c[r][best], c[r][j]);
            std::swap(L[best], L[j]);
        }
        // Cholesky step for row j.
        double partial = 0.0;
        for (std::size_t t = 0; t < j; ++t) partial += L[j][t] * L[j][t];
        const double d = c[j][j] - partial;
        if (d < kPsdTolerance)
            throw NumericError("mvt_rectangle: correlation matrix is not positive semi-definite");
        L[j][j] = std::sqrt(std::max(d, kPivotFloor));
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = c[i][j];
            for (std::size_t t = 0; t < j; ++t) s -= L[i][t] * L[j][t];
            L[i][j] = s / L[j][j];
        }
        // Expected value of the truncated standard normal on [lo, hi].
        const double dens_lo = best_lo == -kInf ? 0.0 : kNormDensityCoef * std::exp(-0.5 * best_lo * best_lo);
        const double dens_hi = best_hi == kInf ? 0.0 : kNormDensityCoef * std::exp(-0.5 * best_hi * best_hi);
        y[j] = (dens_lo - dens_hi) / std::max(best_prob, 1e-12);
    }
    prep.chol = std::move(L);
    return prep;
}

double tent(double x) {
    const double f = x - std::floor(x);
    return std::fabs(2.0 * f - 1.0);
}

// The radial scale s(u) = chi_quantile(u, df) / sqrt(df) is evaluated once per
// lattice point. Each evaluation is a Newton solve, which dominates the cost of
// large integrations, so tabulate s on a uniform grid per df and interpolate
// linearly. Outside the covered band (extreme u) fall back to the exact solve;
// lattice points land there so rarely that the cost is negligible.
class RadialScaleTable {
  public:
    explicit RadialScaleTable(int df) : df_(df), inv_sqrt_df_(1.0 / std::sqrt(double(df))) {
        first_ = kCells / 1024 + 1;  // first grid node with u >= 1/1024
        last_ = kCells - first_;     // last grid node with u <= 1 - 1/1024
        table_.resize(last_ - first_ + 1);
        for (std::size_t i = first_; i <= last_; ++i)
            table_[i - first_] = exact(static_cast<double>(i) / kCells);
    }

    double operator()(double u) const {
        const double x = u * kCells;
        const auto cell = static_cast<std::size_t>(x);
        if (cell < first_ || cell + 1 > last_) return exact(u);
        const double frac = x - static_cast<double>(cell);
        const double* node = table_.data() + (cell - first_);
        return node[0] + frac * (node[1] - node[0]);
    }

    int df() const { return df_; }

  private:
    double exact(double u) const {
        return chi_quantile(std::min(std::max(u, 1e-16), 1.0 - 1e-16), double(df_)) *
               inv_sqrt_df_;
    }

    static constexpr std::size_t kCells = 16384;
    int df_;
    double inv_sqrt_df_;
    std::size_t first_ = 0, last_ = 0;
    std::vector<double> table_;
};

// Tables are pure functions of df, so share them across all integrations.
std::shared_ptr<const RadialScaleTable> radial_table_for(int df) {
    static std::mutex mutex;
    static std::unordered_map<int, std::shared_ptr<const RadialScaleTable>> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(df);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<const RadialScaleTable>(df);
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(df, std::move(table)).first->second;
}

// One lattice-point evaluation of the separation-of-variables integrand.
double evaluate_point(const PreparedProblem& prep, double radial_scale,
                      const double* generators, const double* shift,
                      double point_index, std::vector<double>& y) {
    const std::size_t m = prep.dim;
    double prod = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
        double accum = 0.0;
        for (std::size_t t = 0; t < j; ++t) accum += prep.chol[j][t] * y[t];
        const double denom = prep.chol[j][j];
        const double lo = prep.lower[j] == -kInf
                              ? 0.0
                              : norm_cdf((radial_scale * prep.lower[j] - accum) / denom);
        const double hi = prep.upper[j] == kInf
                              ? 1.0
                              : norm_cdf((radial_scale * prep.upper[j] - accum) / denom);
        const double width = hi - lo;
        if (width <= 0.0) return 0.0;
        prod *= width;
        if (j + 1 < m) {
            const double u = tent(point_index * generators[j + 1] + shift[j + 1]);
            y[j] = phi_inv_clamped(lo + u * width);
        }
    }
    return prod;
}

}  // namespace

ProbabilityEstimate mvt_rectangle(const MvtProblem& problem) {
    const std::size_t m = problem.correlation.dim();
    if (problem.lower.size() != m || problem.upper.size() != m)
        throw DataError("mvt_rectangle: bound vectors do not match correlation dimension");
    if (problem.df < 0) throw DataError("mvt_rectangle: df must be >= 0 (0 = normal limit)");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(problem.lower[i] < problem.upper[i]))
            throw DataError("mvt_rectangle: requires lower < upper in every coordinate");
    }

    // Univariate fast path: exact via the scalar cdf.
    if (m == 1) {
        auto cdf1 = [&](double x) {
            if (x == kInf) return 1.0;
            if (x == -kInf) return 0.0;
            return problem.df == 0 ? norm_cdf(x) : t_cdf(x, problem.df);
        };
        ProbabilityEstimate est;
        est.value = std::max(0.0, cdf1(problem.upper[0]) - cdf1(problem.lower[0]));
        est.error_bound = 1e-12;
        return est;
    }
    if (m + 1 > sizeof(kPrimes) / sizeof(kPrimes[0]))
        throw DataError("mvt_rectangle: dimension exceeds the lattice generator table");

    const PreparedProblem prep = prepare(problem);
    double generators[sizeof(kPrimes) / sizeof(kPrimes[0])];
    for (std::size_t j = 0; j <= m; ++j) generators[j] = std::sqrt(kPrimes[j]);

    constexpr std::size_t kShifts = 12;
    double shifts[kShifts][sizeof(kPrimes) / sizeof(kPrimes[0])];
    for (std::size_t s = 0; s < kShifts; ++s) {
        CounterRng rng({problem.options.seed, static_cast<std::uint64_t>(s)});
        for (std::size_t j = 0; j <= m; ++j) shifts[s][j] = rng.next_double();
    }

    std::shared_ptr<const RadialScaleTable> radial_table;
    if (problem.df > 0) radial_table = radial_table_for(problem.df);

    double shift_sums[kShifts] = {0.0};
    std::vector<double> y(m, 0.0);
    std::size_t points_per_shift = 0;
    std::size_t next_batch = 32;
    const std::size_t max_per_shift =
        std::max<std::size_t>(32, problem.options.max_samples / kShifts);

    ProbabilityEstimate est;
    for (;;) {
        for (std::size_t s = 0; s < kShifts; ++s) {
            double acc = 0.0;
            for (std::size_t i = points_per_shift; i < next_batch; ++i) {
                const double idx = static_cast<double>(i + 1);
                double radial = 1.0;
                if (radial_table) {
                    const double u0 = tent(idx * generators[0] + shifts[s][0]);
                    radial = (*radial_table)(u0);
                }
                acc += evaluate_point(prep, radial, generators, shifts[s], idx, y);
            }
            shift_sums[s] += acc;
        }
        points_per_shift = next_batch;

        double mean = 0.0;
        for (std::size_t s = 0; s < kShifts; ++s) mean += shift_sums[s] / points_per_shift;
        mean /= kShifts;
        double var = 0.0;
        for (std::size_t s = 0; s < kShifts; ++s) {
            const double d = shift_sums[s] / points_per_shift - mean;
            var += d * d;
        }
        var /= (kShifts - 1);
        est.value = std::min(1.0, std::max(0.0, mean));
        est.error_bound = 3.5 * std::sqrt(var / kShifts);

        if (est.error_bound <= problem.options.abs_tolerance) break;
        if (points_per_shift >= max_per_shift) {
            est.accuracy_warning = est.error_bound > 10.0 * problem.options.abs_tolerance;
            break;
        }
        next_batch = std::min(points_per_shift * 2, max_per_shift);
    }
    return est;
}

namespace {

// Quantile solves are deterministic in their inputs and expensive (a full
// bisection, each step an integration), while callers routinely re-request the
// same critical value, so memoize process-wide.
std::string quantile_cache_key(double prob, const CorrelationMatrix& R, int df, Sides sides,
                               double q_tolerance, const MvtOptions& options) {
    std::string key;
    key.reserve(64 + R.dim() * R.dim() * sizeof(double));
    auto push = [&key](const void* bytes, std::size_t n) {
        key.append(static_cast<const char*>(bytes), n);
    };
    push(&prob, sizeof prob);
    push(&df, sizeof df);
    const int side_tag = sides == Sides::OneSided ? 1 : 2;
    push(&side_tag, sizeof side_tag);
    push(&q_tolerance, sizeof q_tolerance);
    push(&options.abs_tolerance, sizeof options.abs_tolerance);
    push(&options.max_samples, sizeof options.max_samples);
    push(&options.seed, sizeof options.seed);
    for (const auto& row : R.entries)
        for (double v : row) push(&v, sizeof v);
    return key;
}

std::mutex quantile_cache_mutex;
std::unordered_map<std::string, double> quantile_cache;

}  // namespace

double mvt_equicoordinate_quantile(double prob, const CorrelationMatrix& R, int df,
                                   Sides sides, double q_tolerance,
                                   const MvtOptions& options) {
    if (!(prob > 0.0 && prob < 1.0))
        throw DataError("mvt_equicoordinate_quantile: prob outside (0, 1)");
    const std::size_t m = R.dim();
    if (m == 0) throw DataError("mvt_equicoordinate_quantile: empty correlation");

    if (m == 1) {
        // Exact scalar inversion.
        const double p = sides == Sides::OneSided ? prob : 0.5 * (1.0 + prob);
        return df == 0 ? norm_quantile(p) : t_quantile(p, df);
    }

    const std::string cache_key = quantile_cache_key(prob, R, df, sides, q_tolerance, options);
    {
        std::lock_guard<std::mutex> lock(quantile_cache_mutex);
        auto it = quantile_cache.find(cache_key);
        if (it != quantile_cache.end()) return it->second;
    }

    MvtProblem problem;
    problem.correlation = R;
    problem.df = df;
    problem.options = options;
    problem.lower.assign(m, sides == Sides::OneSided ? -kInf : 0.0);
    problem.upper.assign(m, 0.0);

    // Early bisection steps only need to pick a half-interval, so a loose
    // integration suffices; the requested tolerance applies near convergence.
    auto cdf_at = [&](double q, double bracket_width) {
        for (std::size_t i = 0; i < m; ++i) {
            problem.upper[i] = q;
            if (sides == Sides::TwoSided) problem.lower[i] = -q;
        }
        problem.options.abs_tolerance = std::max(
            options.abs_tolerance, std::min(1e-3, 0.02 * bracket_width));
        return mvt_rectangle(problem).value;
    };

    double lo = 0.0, hi = 50.0;
    if (cdf_at(hi, 1.0) < prob)
        throw NumericError("mvt_equicoordinate_quantile: failed to bracket in [0, 50]");
    if (sides == Sides::OneSided && cdf_at(0.0, 1.0) >= prob) {
        // Target sits at or below the orthant probability: bracket downward.
        lo = -50.0;
        if (cdf_at(lo, 1.0) >= prob)
            throw NumericError("mvt_equicoordinate_quantile: failed to bracket in [-50, 0]");
        hi = 0.0;
    }
    while (hi - lo > q_tolerance) {
        const double mid = 0.5 * (lo + hi);
        (cdf_at(mid, hi - lo) < prob ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    {
        std::lock_guard<std::mutex> lock(quantile_cache_mutex);
        quantile_cache.emplace(cache_key, q);
    }
    return q;
}

}  // namespace trendmct
