#include "trendmct/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "trendmct/errors.hpp"
#include "trendmct/rng.hpp"

namespace trendmct {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

TestFamily family_from_string(const std::string& name) {
    if (name == "anova-f") return TestFamily::AnovaF;
    if (name == "grand-mean-mct") return TestFamily::GrandMeanMCT;
    if (name == "grand-mean-mct-pava") return TestFamily::GrandMeanMCTPava;
    if (name == "williams-mct") return TestFamily::WilliamsMCT;
    if (name == "bartholomew-permutation") return TestFamily::BartholomewPermutation;
    throw ConfigError("unknown test family: " + name);
}

TestSpec grid_spec(TestFamily family, Sides sides, VarianceMode mode) {
    TestSpec spec;
    spec.family = family;
    spec.sides = sides;
    spec.variance_mode = mode;
    spec.mvt.abs_tolerance = 1e-3;  // simulation-mode integration tolerance
    return spec;
}

// How the engine decides a single run for one test.
enum class EvalKind { Anova, PooledMct, SandwichMct, Permutation, Slow };

struct PreparedTest {
    std::string name;
    TestSpec spec;
    EvalKind kind = EvalKind::Slow;
    ContrastMatrix cm;            // MCT kinds
    CorrelationMatrix pooled_R;   // PooledMct
    double threshold = 0.0;       // PooledMct: cached equicoordinate quantile
    bool pava = false;
    int ref_df = 0;               // reference df (0 = normal limit)
};

struct Prepared {
    std::vector<PreparedTest> tests;
    std::vector<double> effective_mu;
    std::vector<double> pava_weights;  // group sizes as doubles
    bool need_pooled = false;
    bool need_sandwich = false;
};

ContrastMatrix contrasts_for_family(TestFamily family, const std::vector<int>& sizes) {
    if (family == TestFamily::WilliamsMCT) return williams_contrasts(sizes);
    return grand_mean_contrasts(sizes);
}

Prepared prepare(const Scenario& s) {
    Prepared prep;
    prep.effective_mu.resize(s.mu.size());
    for (std::size_t i = 0; i < s.mu.size(); ++i) prep.effective_mu[i] = s.span * s.mu[i];
    prep.pava_weights.assign(s.group_sizes.begin(), s.group_sizes.end());

    int total = 0;
    for (int n : s.group_sizes) total += n;
    const int df = total - static_cast<int>(s.group_sizes.size());

    for (std::size_t t = 0; t < s.tests.size(); ++t) {
        PreparedTest pt;
        pt.name = s.test_names[t];
        pt.spec = s.tests[t];
        pt.spec.alpha = s.alpha;
        switch (pt.spec.family) {
            case TestFamily::AnovaF:
                pt.kind = EvalKind::Anova;
                break;
            case TestFamily::BartholomewPermutation:
                pt.kind = EvalKind::Permutation;
                pt.spec.permutations = s.permutations;
                break;
            default: {
                if (pt.spec.studentize == StudentizeMode::SigmaOnly) {
                    // No pivotal fast path; fall back to the full test.
                    pt.kind = EvalKind::Slow;
                    break;
                }
                pt.cm = contrasts_for_family(pt.spec.family, s.group_sizes);
                pt.pava = pt.spec.family == TestFamily::GrandMeanMCTPava;
                pt.ref_df = pt.pava ? 0 : df;
                if (pt.spec.variance_mode == VarianceMode::Pooled) {
                    pt.kind = EvalKind::PooledMct;
                    prep.need_pooled = true;
                    pt.pooled_R = contrast_correlation(pt.cm);
                    // Rejection reduces to comparing the max (oriented)
                    // statistic with a fixed equicoordinate quantile, so the
                    // threshold is resolved once, tighter than run tolerance.
                    MvtOptions qopts = pt.spec.mvt;
                    qopts.abs_tolerance = std::min(qopts.abs_tolerance, 2e-4);
                    pt.threshold = mvt_equicoordinate_quantile(
                        1.0 - s.alpha, pt.pooled_R, pt.ref_df, pt.spec.sides, 5e-4, qopts);
                } else {
                    pt.kind = EvalKind::SandwichMct;
                    prep.need_sandwich = true;
                }
                break;
            }
        }
        if (pt.kind == EvalKind::PooledMct) prep.need_pooled = true;
        if (pt.kind == EvalKind::SandwichMct) prep.need_sandwich = true;
        prep.tests.push_back(std::move(pt));
    }
    return prep;
}

void generate_run(const Scenario& s, const Prepared& prep, std::uint64_t run,
                  OneWayLayout& layout) {
    const std::size_t k = s.group_sizes.size();
    layout.responses.resize(k);
    for (std::size_t g = 0; g < k; ++g) {
        auto& x = layout.responses[g];
        x.resize(static_cast<std::size_t>(s.group_sizes[g]));
        CounterRng rng({s.seed, run, static_cast<std::uint64_t>(g + 1)});
        for (double& v : x) v = prep.effective_mu[g] + s.sigma[g] * rng.next_normal();
    }
}

// Largest oriented statistic of the min-p construction: signed for one-sided
// arithmetic contrasts (direction applied), absolute otherwise.
double max_criterion(const PreparedTest& pt, const GroupEstimates& est,
                     const std::vector<double>& pava_weights) {
    std::vector<double> m = est.means;
    if (pt.pava)
        m = pava(std::span<const double>(m), std::span<const double>(pava_weights),
                 pt.spec.direction)
                .fitted;
    const bool oriented = !pt.pava && pt.spec.sides == Sides::OneSided;
    const double sign =
        pt.spec.direction == Direction::Increasing ? 1.0 : -1.0;
    double best = -kInf;
    for (std::size_t h = 0; h < pt.cm.xi(); ++h) {
        double num = 0.0;
        double var = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double c = pt.cm.coefficients[h][i];
            num += c * m[i];
            var += c * c * est.mean_variances[i];
        }
        if (!(var > 0.0)) throw DataError("simulation: degenerate contrast variance");
        const double t = num / std::sqrt(var);
        const double crit = oriented ? sign * t : std::fabs(t);
        best = std::max(best, crit);
    }
    return best;
}

bool evaluate(const PreparedTest& pt, const OneWayLayout& layout,
              const GroupEstimates* pooled, const GroupEstimates* sandwich,
              const std::vector<double>& pava_weights, std::uint64_t run) {
    switch (pt.kind) {
        case EvalKind::Anova:
            return anova_f(layout).global_p <= pt.spec.alpha;
        case EvalKind::Permutation: {
            const TestReport report = bartholomew_permutation(
                layout, pt.spec.direction, pt.spec.permutations,
                derive_key(pt.spec.perm_seed, run));
            return report.global_p <= pt.spec.alpha;
        }
        case EvalKind::PooledMct:
            return max_criterion(pt, *pooled, pava_weights) > pt.threshold;
        case EvalKind::SandwichMct: {
            const double crit = max_criterion(pt, *sandwich, pava_weights);
            const CorrelationMatrix R = contrast_correlation(
                pt.cm, std::span<const double>(sandwich->mean_variances));
            MvtProblem problem;
            problem.correlation = R;
            problem.df = pt.ref_df;
            problem.options = pt.spec.mvt;
            const std::size_t xi = R.dim();
            if (pt.spec.sides == Sides::OneSided) {
                problem.lower.assign(xi, -kInf);
                problem.upper.assign(xi, crit);
            } else {
                const double bound = std::fabs(crit);
                // All statistics exactly 0 (e.g. a flat isotonic fit): the
                // rectangle is empty and the p-value is 1 -- never a rejection.
                if (bound == 0.0) return false;
                problem.lower.assign(xi, -bound);
                problem.upper.assign(xi, bound);
            }
            const double p = 1.0 - mvt_rectangle(problem).value;
            return p <= pt.spec.alpha;
        }
        case EvalKind::Slow:
            return run_test(layout, pt.spec).global_p <= pt.spec.alpha;
    }
    return false;
}

}  // namespace

void Scenario::validate() const {
    const std::size_t k = group_sizes.size();
    if (k < 2) throw ConfigError("scenario " + label + ": need at least two groups");
    for (int n : group_sizes)
        if (n < 2) throw ConfigError("scenario " + label + ": every group size must be >= 2");
    if (mu.size() != k || sigma.size() != k)
        throw ConfigError("scenario " + label + ": mu/sigma length must match group count");
    for (double sd : sigma)
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw ConfigError("scenario " + label + ": sigma entries must be positive");
    for (double m : mu)
        if (!std::isfinite(m)) throw ConfigError("scenario " + label + ": non-finite mu");
    if (!std::isfinite(span)) throw ConfigError("scenario " + label + ": non-finite span");
    if (runs < 1) throw ConfigError("scenario " + label + ": runs must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("scenario " + label + ": alpha must be in (0, 1)");
    if (tests.empty()) throw ConfigError("scenario " + label + ": no tests requested");
    if (tests.size() != test_names.size())
        throw ConfigError("scenario " + label + ": test/name bookkeeping mismatch");
    if (permutations < 1)
        throw ConfigError("scenario " + label + ": permutations must be >= 1");
    if (label.find(',') != std::string::npos || label.find('\n') != std::string::npos)
        throw ConfigError("scenario labels must not contain commas or newlines");
}

bool Scenario::null_case() const {
    double lo = kInf, hi = -kInf;
    for (double m : mu) {
        lo = std::min(lo, span * m);
        hi = std::max(hi, span * m);
    }
    return hi - lo <= 1e-9 * (1.0 + std::max(std::fabs(hi), std::fabs(lo)));
}

TestSpec test_spec_from_name(const std::string& name) {
    if (name == "AOV") return grid_spec(TestFamily::AnovaF, Sides::TwoSided, VarianceMode::Pooled);
    if (name == "MCT2") return grid_spec(TestFamily::GrandMeanMCT, Sides::TwoSided, VarianceMode::Pooled);
    if (name == "heMCT2") return grid_spec(TestFamily::GrandMeanMCT, Sides::TwoSided, VarianceMode::Sandwich);
    if (name == "MCT1") return grid_spec(TestFamily::GrandMeanMCT, Sides::OneSided, VarianceMode::Pooled);
    if (name == "heMCT1") return grid_spec(TestFamily::GrandMeanMCT, Sides::OneSided, VarianceMode::Sandwich);
    if (name == "E2k") return grid_spec(TestFamily::BartholomewPermutation, Sides::OneSided, VarianceMode::Pooled);
    if (name == "WIho2") return grid_spec(TestFamily::WilliamsMCT, Sides::TwoSided, VarianceMode::Pooled);
    if (name == "WIhe2") return grid_spec(TestFamily::WilliamsMCT, Sides::TwoSided, VarianceMode::Sandwich);
    if (name == "WIho1") return grid_spec(TestFamily::WilliamsMCT, Sides::OneSided, VarianceMode::Pooled);
    if (name == "WIhe1") return grid_spec(TestFamily::WilliamsMCT, Sides::OneSided, VarianceMode::Sandwich);
    if (name == "MCTEho2") return grid_spec(TestFamily::GrandMeanMCTPava, Sides::TwoSided, VarianceMode::Pooled);
    if (name == "MCTEhe2") return grid_spec(TestFamily::GrandMeanMCTPava, Sides::TwoSided, VarianceMode::Sandwich);
    if (name == "MCTEho1") return grid_spec(TestFamily::GrandMeanMCTPava, Sides::OneSided, VarianceMode::Pooled);
    if (name == "MCTEhe1") return grid_spec(TestFamily::GrandMeanMCTPava, Sides::OneSided, VarianceMode::Sandwich);
    throw ConfigError("unknown test name: " + name +
                      " (expected one of AOV, MCT1/2, heMCT1/2, E2k, WIho1/2, WIhe1/2, "
                      "MCTEho1/2, MCTEhe1/2)");
}

namespace {

TestSpec spec_from_json_entry(const json& jt, std::string& name_out) {
    if (jt.is_string()) {
        name_out = jt.get<std::string>();
        return test_spec_from_name(name_out);
    }
    if (!jt.is_object()) throw ConfigError("test entries must be names or objects");
    TestSpec spec;
    spec.mvt.abs_tolerance = 1e-3;
    const std::string family = jt.at("family").get<std::string>();
    spec.family = family_from_string(family);
    if (jt.contains("sides")) {
        const int sides = jt.at("sides").get<int>();
        if (sides != 1 && sides != 2) throw ConfigError("sides must be 1 or 2");
        spec.sides = sides == 1 ? Sides::OneSided : Sides::TwoSided;
    }
    if (jt.contains("variance")) {
        const std::string v = jt.at("variance").get<std::string>();
        if (v == "pooled") spec.variance_mode = VarianceMode::Pooled;
        else if (v == "sandwich") spec.variance_mode = VarianceMode::Sandwich;
        else throw ConfigError("variance must be 'pooled' or 'sandwich'");
    }
    if (jt.contains("direction")) {
        const std::string d = jt.at("direction").get<std::string>();
        if (d == "up") spec.direction = Direction::Increasing;
        else if (d == "down") spec.direction = Direction::Decreasing;
        else throw ConfigError("direction must be 'up' or 'down'");
    }
    if (jt.contains("hc")) {
        const std::string h = jt.at("hc").get<std::string>();
        if (h == "hc0") spec.hc = HcFlavor::HC0;
        else if (h == "hc1") spec.hc = HcFlavor::HC1;
        else if (h == "hc3") spec.hc = HcFlavor::HC3;
        else throw ConfigError("hc must be 'hc0', 'hc1' or 'hc3'");
    }
    if (jt.contains("studentize")) {
        const std::string m = jt.at("studentize").get<std::string>();
        if (m == "full") spec.studentize = StudentizeMode::FullStandardError;
        else if (m == "sigma-only") spec.studentize = StudentizeMode::SigmaOnly;
        else throw ConfigError("studentize must be 'full' or 'sigma-only'");
    }
    if (jt.contains("mvt_tol")) spec.mvt.abs_tolerance = jt.at("mvt_tol").get<double>();
    if (jt.contains("mvt_seed")) spec.mvt.seed = jt.at("mvt_seed").get<std::uint64_t>();
    if (jt.contains("perm_seed")) spec.perm_seed = jt.at("perm_seed").get<std::uint64_t>();
    name_out = jt.value("name", family);
    return spec;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    try {
        s.label = j.value("label", std::string("scenario"));
        s.group_sizes = j.at("group_sizes").get<std::vector<int>>();
        s.mu = j.at("mu").get<std::vector<double>>();
        if (j.at("sigma").is_number()) {
            s.sigma.assign(s.group_sizes.size(), j.at("sigma").get<double>());
        } else {
            s.sigma = j.at("sigma").get<std::vector<double>>();
        }
        s.span = j.value("span", 1.0);
        s.runs = j.at("runs").get<int>();
        s.alpha = j.value("alpha", 0.05);
        s.seed = j.value("seed", std::uint64_t{1});
        s.permutations = j.value("permutations", 1000);
        if (!j.contains("tests") || !j.at("tests").is_array() || j.at("tests").empty())
            throw ConfigError("scenario " + s.label + ": 'tests' must be a non-empty array");
        for (const auto& jt : j.at("tests")) {
            std::string name;
            TestSpec spec = spec_from_json_entry(jt, name);
            s.tests.push_back(spec);
            s.test_names.push_back(name);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    std::vector<Scenario> scenarios;
    const json* list = nullptr;
    if (j.is_array()) {
        list = &j;
    } else if (j.is_object() && j.contains("scenarios")) {
        if (!j.at("scenarios").is_array())
            throw ConfigError(path + ": 'scenarios' must be an array");
        list = &j.at("scenarios");
    }
    try {
        if (list) {
            for (const auto& item : *list) scenarios.push_back(scenario_from_json(item));
        } else {
            scenarios.push_back(scenario_from_json(j));
        }
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (scenarios.empty()) throw ConfigError(path + ": no scenarios defined");
    return scenarios;
}

SimulationTable run_scenario(const Scenario& scenario, int parallelism) {
    scenario.validate();
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    const Prepared prep = prepare(scenario);
    const std::size_t n_tests = prep.tests.size();
    const int runs = scenario.runs;
    const int threads = std::min(parallelism, runs);

    std::vector<std::vector<long long>> counts(
        static_cast<std::size_t>(threads), std::vector<long long>(n_tests, 0));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));

    auto worker = [&](int slot, int first_run, int last_run) {
        try {
            OneWayLayout layout;
            for (int r = first_run; r <= last_run; ++r) {
                const auto run = static_cast<std::uint64_t>(r);
                generate_run(scenario, prep, run, layout);
                GroupEstimates pooled;
                GroupEstimates sandwich;
                if (prep.need_pooled) pooled = summarize(layout, VarianceMode::Pooled);
                for (std::size_t t = 0; t < n_tests; ++t) {
                    const PreparedTest& pt = prep.tests[t];
                    if (pt.kind == EvalKind::SandwichMct &&
                        (sandwich.means.empty() || sandwich.hc != pt.spec.hc))
                        sandwich = summarize(layout, VarianceMode::Sandwich, pt.spec.hc);
                    if (evaluate(pt, layout, &pooled, &sandwich, prep.pava_weights, run))
                        ++counts[static_cast<std::size_t>(slot)][t];
                }
            }
        } catch (const TrendError& e) {
            failures[static_cast<std::size_t>(slot)] = std::make_exception_ptr(
                DataError("runs " + std::to_string(first_run) + ".." +
                          std::to_string(last_run) + ": " + e.what()));
        } catch (...) {
            failures[static_cast<std::size_t>(slot)] = std::current_exception();
        }
    };

    if (threads == 1) {
        worker(0, 1, runs);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int p = 0; p < threads; ++p) {
            const int first = runs * p / threads + 1;
            const int last = runs * (p + 1) / threads;
            pool.emplace_back(worker, p, first, last);
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    SimulationTable table;
    const bool h0 = scenario.null_case();
    for (std::size_t t = 0; t < n_tests; ++t) {
        long long total = 0;
        for (int p = 0; p < threads; ++p) total += counts[static_cast<std::size_t>(p)][t];
        const PreparedTest& pt = prep.tests[t];
        SimRow row;
        row.label = scenario.label;
        row.test_name = pt.name;
        switch (pt.spec.family) {
            case TestFamily::AnovaF:
                row.sides = "2";
                row.variance_mode = "pooled";
                row.estimand = "arithmetic";
                break;
            case TestFamily::BartholomewPermutation:
                row.sides = "1";
                row.variance_mode = "pooled";
                row.estimand = "pava";
                break;
            default:
                row.sides = pt.spec.sides == Sides::OneSided ? "1" : "2";
                row.variance_mode =
                    pt.spec.variance_mode == VarianceMode::Pooled ? "pooled" : "sandwich";
                row.estimand = pt.pava ? "pava" : "arithmetic";
                break;
        }
        row.runs = runs;
        row.rejections = total;
        row.rate = static_cast<double>(total) / static_cast<double>(runs);
        row.se = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(runs));
        row.null_scenario = h0;
        table.rows.push_back(std::move(row));
    }

    // Pitman efficacy: new order-restricted MCT against the permutation test.
    const SimRow* e2k = nullptr;
    for (const auto& row : table.rows)
        if (row.test_name == "E2k") e2k = &row;
    if (e2k && e2k->rate > 0.0) {
        for (auto& row : table.rows)
            if (row.test_name == "MCTEho1") row.pitman = row.rate / e2k->rate;
    }
    return table;
}

SimulationTable run_study(const std::vector<Scenario>& scenarios, int parallelism) {
    if (scenarios.empty()) throw ConfigError("study: no scenarios");
    SimulationTable table;
    for (const auto& s : scenarios) {
        SimulationTable part = run_scenario(s, parallelism);
        for (auto& row : part.rows) table.rows.push_back(std::move(row));
    }
    return table;
}

CalibrationResult calibrate_span(const Scenario& base, const std::string& anchor_name,
                                 double target_rate, double rate_tolerance,
                                 int calibration_runs) {
    base.validate();
    if (!(target_rate > base.alpha && target_rate < 1.0))
        throw ConfigError("calibration target rate must lie in (alpha, 1)");
    Scenario s = base;
    s.tests = {test_spec_from_name(anchor_name)};
    s.test_names = {anchor_name};
    if (calibration_runs > 0) s.runs = calibration_runs;

    // Common random numbers: the seed is fixed, so the rate is a monotone
    // step function of the span and bisection is exact up to step granularity.
    auto rate_at = [&s](double span) {
        s.span = span;
        return run_scenario(s, 1).rows.front().rate;
    };

    double lo = 0.0;
    double hi = std::fabs(base.span) > 0.0 ? std::fabs(base.span) : 1.0;
    double rate_hi = rate_at(hi);
    int growth = 0;
    while (rate_hi < target_rate && growth++ < 24) {
        hi *= 1.7;
        rate_hi = rate_at(hi);
    }
    if (rate_hi < target_rate)
        throw NumericError("calibration: anchor test cannot reach the target rate");

    for (int iter = 0; iter < 40 && (hi - lo) > 1e-4 * (1.0 + hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (rate_at(mid) < target_rate)
            lo = mid;
        else
            hi = mid;
    }
    CalibrationResult result;
    result.span = hi;  // smallest probed span meeting the target
    result.achieved_rate = rate_at(hi);
    result.runs = s.runs;
    if (std::fabs(result.achieved_rate - target_rate) > rate_tolerance)
        throw NumericError("calibration: achieved rate " +
                           std::to_string(result.achieved_rate) +
                           " misses target " + std::to_string(target_rate));
    return result;
}

std::string render_csv(const SimulationTable& table) {
    std::string out = "label,test,sides,variance_mode,estimand,runs,rejections,rate,se\n";
    char buffer[256];
    for (const auto& row : table.rows) {
        std::snprintf(buffer, sizeof(buffer), "%d,%lld,%.12g,%.12g\n", row.runs,
                      row.rejections, row.rate, row.se);
        out += row.label + "," + row.test_name + "," + row.sides + "," +
               row.variance_mode + "," + row.estimand + "," + buffer;
    }
    return out;
}

std::string render_text(const SimulationTable& table) {
    std::ostringstream out;
    std::string current_label;
    char buffer[256];
    for (const auto& row : table.rows) {
        if (row.label != current_label) {
            current_label = row.label;
            out << "== " << current_label << " (runs=" << row.runs
                << (row.null_scenario ? ", null case" : "") << ") ==\n";
            std::snprintf(buffer, sizeof(buffer), "  %-10s %-5s %-8s %-10s %8s %8s\n",
                          "test", "sides", "variance", "estimand", "rate", "se");
            out << buffer;
        }
        std::snprintf(buffer, sizeof(buffer), "  %-10s %-5s %-8s %-10s %8.4f %8.4f",
                      row.test_name.c_str(), row.sides.c_str(), row.variance_mode.c_str(),
                      row.estimand.c_str(), row.rate, row.se);
        out << buffer;
        if (row.pitman) {
            std::snprintf(buffer, sizeof(buffer), "  Pit=%.3f", *row.pitman);
            out << buffer;
        }
        if (row.null_scenario) {
            if (row.rate < 0.04) out << "  [conservative]";
            if (row.rate > 0.065) out << "  [LIBERAL]";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace trendmct
