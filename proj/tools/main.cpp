// Command-line front end: `analyze` runs the test battery on a CSV dataset,
// `simulate` runs Monte Carlo scenario files, `calibrate` solves for the
// effect span that hits a target power. Exit codes: 0 success, 2 config
// error, 3 data error, 4 numeric error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "trendmct/analyze.hpp"
#include "trendmct/errors.hpp"
#include "trendmct/sim.hpp"

namespace {

using namespace trendmct;

struct SharedFlags {
    double alpha = 0.05;
    std::string direction = "up";
    int sides = 1;
    std::string variance = "pooled";
    std::string hc = "hc3";
    std::string studentize = "full";
    double mvt_tol = 1e-4;
    std::uint64_t mvt_seed = MvtOptions{}.seed;
    std::uint64_t perm_seed = TestSpec{}.perm_seed;
    int permutations = 10000;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& flags) {
    cmd->add_option("--alpha", flags.alpha, "Simultaneous test level")
        ->check(CLI::Range(1e-6, 0.5));
    cmd->add_option("--direction", flags.direction, "A-priori trend direction")
        ->check(CLI::IsMember({"up", "down"}));
    cmd->add_option("--sides", flags.sides, "1 = one-sided, 2 = two-sided")
        ->check(CLI::IsMember({1, 2}));
    cmd->add_option("--variance", flags.variance, "Covariance model for the contrasts")
        ->check(CLI::IsMember({"pooled", "sandwich"}));
    cmd->add_option("--hc", flags.hc, "Sandwich flavor")
        ->check(CLI::IsMember({"hc0", "hc1", "hc3"}));
    cmd->add_option("--studentize", flags.studentize,
                    "full = per-contrast standard errors, sigma-only = pooled S alone")
        ->check(CLI::IsMember({"full", "sigma-only"}));
    cmd->add_option("--mvt-tol", flags.mvt_tol, "Integration tolerance for p-values")
        ->check(CLI::Range(1e-7, 1e-1));
    cmd->add_option("--mvt-seed", flags.mvt_seed, "Integration randomization seed");
    cmd->add_option("--perm-seed", flags.perm_seed, "Permutation stream seed");
    cmd->add_option("--permutations", flags.permutations,
                    "Permutation-test replicates")
        ->check(CLI::Range(1, 10'000'000));
}

Direction parse_direction(const std::string& text) {
    return text == "down" ? Direction::Decreasing : Direction::Increasing;
}

HcFlavor parse_hc(const std::string& text) {
    if (text == "hc0") return HcFlavor::HC0;
    if (text == "hc1") return HcFlavor::HC1;
    return HcFlavor::HC3;
}

// Flags that name the construction (sides/variance/family) are pinned by grid
// names; the remaining knobs always follow the command line.
void apply_tuning(TestSpec& spec, const SharedFlags& flags) {
    spec.alpha = flags.alpha;
    spec.direction = parse_direction(flags.direction);
    spec.hc = parse_hc(flags.hc);
    spec.studentize = flags.studentize == "sigma-only" ? StudentizeMode::SigmaOnly
                                                       : StudentizeMode::FullStandardError;
    spec.mvt.abs_tolerance = flags.mvt_tol;
    spec.mvt.seed = flags.mvt_seed;
    spec.perm_seed = flags.perm_seed;
    spec.permutations = flags.permutations;
}

TestSpec battery_spec(TestFamily family, const SharedFlags& flags) {
    TestSpec spec;
    spec.family = family;
    spec.sides = flags.sides == 2 ? Sides::TwoSided : Sides::OneSided;
    spec.variance_mode =
        flags.variance == "sandwich" ? VarianceMode::Sandwich : VarianceMode::Pooled;
    apply_tuning(spec, flags);
    return spec;
}

std::vector<std::vector<double>> read_contrast_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open contrast file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream fields(line);
        std::vector<double> row;
        double v = 0.0;
        while (fields >> v) row.push_back(v);
        if (!fields.eof())
            throw ConfigError(path + ": line " + std::to_string(line_number) +
                              ": non-numeric contrast coefficient");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": no contrast rows found");
    return rows;
}

void write_output(const std::optional<std::string>& path, const std::string& content) {
    if (!path) {
        std::cout << content;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + *path);
    out << content;
}

void run_analyze(const std::string& input, const std::string& group_col,
                 const std::string& response_col, const std::vector<std::string>& levels,
                 const std::vector<std::string>& tests, const SharedFlags& flags,
                 const std::string& contrast_family, const std::string& contrast_file,
                 bool as_json, bool as_csv, const std::optional<std::string>& out_path) {
    AnalysisConfig config;
    config.input_path = input;
    config.group_column = group_col;
    config.response_column = response_col;
    if (!levels.empty()) config.level_order = levels;
    config.direction = parse_direction(flags.direction);
    if (as_json && as_csv) throw ConfigError("choose at most one of --json and --csv");
    config.output = as_json ? OutputFormat::Json
                            : (as_csv ? OutputFormat::Csv : OutputFormat::Text);
    if (!contrast_file.empty()) config.custom_rows = read_contrast_rows(contrast_file);

    if (tests.empty()) {
        for (TestFamily family :
             {TestFamily::AnovaF, TestFamily::GrandMeanMCT, TestFamily::GrandMeanMCTPava,
              TestFamily::WilliamsMCT, TestFamily::BartholomewPermutation}) {
            // --contrasts narrows the battery's contrast families; the F test
            // and the permutation test are kept regardless.
            if (contrast_family == "grandmean" && family == TestFamily::WilliamsMCT)
                continue;
            if (contrast_family == "williams" &&
                (family == TestFamily::GrandMeanMCT ||
                 family == TestFamily::GrandMeanMCTPava))
                continue;
            config.tests.push_back(battery_spec(family, flags));
            config.test_names.push_back(family_name(family));
        }
    } else {
        for (const std::string& name : tests) {
            TestSpec spec = test_spec_from_name(name);
            apply_tuning(spec, flags);
            spec.mvt.abs_tolerance = flags.mvt_tol;  // analysis-grade tolerance
            config.tests.push_back(spec);
            config.test_names.push_back(name);
        }
    }

    const AnalysisResult result = analyze(config);
    switch (config.output) {
        case OutputFormat::Json: write_output(out_path, render_analysis_json(result)); break;
        case OutputFormat::Csv: write_output(out_path, render_analysis_csv(result)); break;
        case OutputFormat::Text: write_output(out_path, render_analysis_text(result)); break;
    }
}

void run_simulate(const std::string& config_path, const std::optional<std::string>& out_path,
                  int parallel, const std::optional<std::uint64_t>& seed_override,
                  bool text_table) {
    std::vector<Scenario> scenarios = load_scenarios(config_path);
    if (seed_override)
        for (auto& s : scenarios) s.seed = *seed_override;
    const SimulationTable table = run_study(scenarios, parallel);
    if (out_path) {
        write_output(out_path, render_csv(table));
        std::cout << render_text(table);
    } else if (text_table) {
        std::cout << render_text(table);
    } else {
        std::cout << render_csv(table);
    }
}

void run_calibrate(const std::string& config_path, const std::string& label,
                   const std::string& anchor, double target, double tolerance, int runs,
                   bool as_json) {
    const std::vector<Scenario> scenarios = load_scenarios(config_path);
    const Scenario* chosen = nullptr;
    if (label.empty()) {
        if (scenarios.size() != 1)
            throw ConfigError("config defines " + std::to_string(scenarios.size()) +
                              " scenarios; select one with --label");
        chosen = &scenarios.front();
    } else {
        for (const auto& s : scenarios)
            if (s.label == label) chosen = &s;
        if (!chosen) throw ConfigError("no scenario labeled '" + label + "' in " + config_path);
    }
    const CalibrationResult result =
        calibrate_span(*chosen, anchor, target, tolerance, runs);
    char buffer[256];
    if (as_json) {
        std::snprintf(buffer, sizeof(buffer),
                      "{\"label\":\"%s\",\"anchor\":\"%s\",\"span\":%.12g,"
                      "\"achieved_rate\":%.12g,\"runs\":%d}\n",
                      chosen->label.c_str(), anchor.c_str(), result.span,
                      result.achieved_rate, result.runs);
    } else {
        std::snprintf(buffer, sizeof(buffer),
                      "scenario %s: span = %.12g (anchor %s reaches rate %.4f at %d runs)\n",
                      chosen->label.c_str(), result.span, anchor.c_str(),
                      result.achieved_rate, result.runs);
    }
    std::cout << buffer;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-restricted trend tests: analysis, simulation, calibration"};
    app.require_subcommand(1);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Run the test battery on a CSV dataset");
    std::string input, group_col = "group", response_col = "response", contrast_file;
    std::string contrast_family = "both";
    std::vector<std::string> levels, tests;
    SharedFlags analyze_flags;
    bool as_json = false, as_csv = false;
    std::optional<std::string> analyze_out;
    analyze_cmd->add_option("--input", input, "CSV file with one row per observation")
        ->required();
    analyze_cmd->add_option("--group-col", group_col, "Column holding the dose level");
    analyze_cmd->add_option("--response-col", response_col, "Column holding the response");
    analyze_cmd
        ->add_option("--levels", levels,
                     "Comma-separated dose order; first level is the control")
        ->delimiter(',');
    analyze_cmd
        ->add_option("--tests", tests,
                     "Comma-separated grid names (AOV, MCT1, heMCT2, MCTEho1, WIho1, E2k, "
                     "...); defaults to one test per family using the shared flags")
        ->delimiter(',');
    analyze_cmd
        ->add_option("--contrasts", contrast_family,
                     "Contrast families for the default battery (F and permutation "
                     "tests are always included)")
        ->check(CLI::IsMember({"grandmean", "williams", "both"}));
    analyze_cmd->add_option("--contrast-file", contrast_file,
                            "Custom contrast rows (whitespace-separated, # comments)");
    analyze_cmd->add_flag("--json", as_json, "Emit a JSON report");
    analyze_cmd->add_flag("--csv", as_csv, "Emit a per-contrast CSV report");
    analyze_cmd->add_option("--out", analyze_out, "Write the report to a file");
    add_shared_flags(analyze_cmd, analyze_flags);

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Run Monte Carlo scenarios");
    std::string sim_config;
    std::optional<std::string> sim_out;
    std::optional<std::uint64_t> sim_seed;
    int parallel = 1;
    bool sim_text = false;
    simulate_cmd->add_option("--config", sim_config, "Scenario/study JSON file")->required();
    simulate_cmd->add_option("--out", sim_out, "Write the CSV table to a file");
    simulate_cmd->add_option("--parallel", parallel, "Worker threads")
        ->check(CLI::Range(1, 256));
    simulate_cmd->add_option("--seed", sim_seed, "Override every scenario seed");
    simulate_cmd->add_flag("--text", sim_text, "Print the aligned text table instead of CSV");

    // calibrate
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Solve for the span hitting a target power");
    std::string cal_config, cal_label, cal_anchor = "AOV";
    double cal_target = 0.0, cal_tolerance = 0.02;
    int cal_runs = 0;
    bool cal_json = false;
    calibrate_cmd->add_option("--config", cal_config, "Scenario/study JSON file")->required();
    calibrate_cmd->add_option("--label", cal_label, "Scenario to calibrate (if several)");
    calibrate_cmd->add_option("--anchor", cal_anchor, "Anchor test grid name");
    calibrate_cmd->add_option("--target", cal_target, "Target rejection rate for the anchor")
        ->required()
        ->check(CLI::Range(1e-3, 0.9999));
    calibrate_cmd->add_option("--tolerance", cal_tolerance, "Acceptable |rate - target|")
        ->check(CLI::Range(1e-4, 0.5));
    calibrate_cmd->add_option("--runs", cal_runs, "Override the scenario run count")
        ->check(CLI::Range(0, 10'000'000));
    calibrate_cmd->add_flag("--json", cal_json, "Emit the result as JSON");

    analyze_cmd->callback([&] {
        run_analyze(input, group_col, response_col, levels, tests, analyze_flags,
                    contrast_family, contrast_file, as_json, as_csv, analyze_out);
    });
    simulate_cmd->callback(
        [&] { run_simulate(sim_config, sim_out, parallel, sim_seed, sim_text); });
    calibrate_cmd->callback([&] {
        run_calibrate(cal_config, cal_label, cal_anchor, cal_target, cal_tolerance,
                      cal_runs, cal_json);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const TrendError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
