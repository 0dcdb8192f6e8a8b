#pragma once

// Monte Carlo engine: empirical size and power of the test grid over
// user-defined mean/variance profiles, with a counter-based substream scheme
// that makes results independent of the parallel schedule.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trendmct/tests.hpp"

namespace trendmct {

struct Scenario {
    std::string label = "scenario";
    std::vector<int> group_sizes;    // length k, each >= 2
    std::vector<double> mu;          // shape, multiplied by span
    std::vector<double> sigma;       // length k, positive
    double span = 1.0;               // effect scale: effective mean = span * mu
    int runs = 1;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::vector<TestSpec> tests;
    std::vector<std::string> test_names;  // parallel to tests
    int permutations = 1000;              // permutation-test replicates per run

    void validate() const;
    bool null_case() const;  // all effective means equal
};

struct SimRow {
    std::string label;
    std::string test_name;
    std::string sides;          // "1" or "2"
    std::string variance_mode;  // "pooled" or "sandwich"
    std::string estimand;       // "arithmetic" or "pava"
    int runs = 0;
    long long rejections = 0;
    double rate = 0.0;
    double se = 0.0;            // sqrt(rate (1 - rate) / runs)
    bool null_scenario = false;
    // Ratio of this row's rate to the permutation test's rate in the same
    // scenario (set on the order-restricted one-sided pooled MCT row).
    std::optional<double> pitman;
};

struct SimulationTable {
    std::vector<SimRow> rows;
};

// Map a short grid name (AOV, MCT1, heMCT2, E2k, WIho1, MCTEhe1, ...) to its
// TestSpec. Simulation specs default to a 1e-3 integration tolerance.
TestSpec test_spec_from_name(const std::string& name);

// Parse one scenario / a study file ({"scenarios": [...]}, a JSON array, or a
// single scenario object). Test entries may be grid names or spec objects.
Scenario scenario_from_json_text(const std::string& text);
std::vector<Scenario> load_scenarios(const std::string& path);

// Evaluate every test on `runs` shared datasets. Dataset for run r, group g
// (both 1-based) is drawn from the substream (seed, r, g); per-run
// permutation streams are keyed by (perm_seed, r, b). Rejection counts are
// exact integers, so results are bit-identical for any parallelism.
SimulationTable run_scenario(const Scenario& scenario, int parallelism = 1);

SimulationTable run_study(const std::vector<Scenario>& scenarios, int parallelism = 1);

struct CalibrationResult {
    double span = 0.0;
    double achieved_rate = 0.0;
    int runs = 0;
};

// Bisect `span` so that the anchor test's empirical power matches
// `target_rate` (common random numbers across evaluations). The intended
// anchor is AOV: it has a known exact distribution, so all other columns are
// then compared at the same effect size.
CalibrationResult calibrate_span(const Scenario& base, const std::string& anchor_name,
                                 double target_rate, double rate_tolerance = 0.02,
                                 int calibration_runs = 0 /* 0 => base.runs */);

// Pinned machine-readable rendering:
// label,test,sides,variance_mode,estimand,runs,rejections,rate,se
std::string render_csv(const SimulationTable& table);

// Aligned human-readable table; null-case rows are flagged conservative
// (rate < 0.04) or liberal (rate > 0.065), and the Pitman ratio is shown
// where defined.
std::string render_text(const SimulationTable& table);

}  // namespace trendmct
