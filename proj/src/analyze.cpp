#include "trendmct/analyze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>

#include "json.hpp"

#include "trendmct/errors.hpp"
#include "trendmct/isotonic.hpp"

namespace trendmct {

namespace {

using nlohmann::json;

std::string trim(const std::string& raw) {
    std::size_t first = 0;
    std::size_t last = raw.size();
    while (first < last && (std::isspace(static_cast<unsigned char>(raw[first])) != 0))
        ++first;
    while (last > first && (std::isspace(static_cast<unsigned char>(raw[last - 1])) != 0))
        --last;
    std::string out = raw.substr(first, last - first);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(current));
            current.clear();
        } else if (ch != '\r') {
            current += ch;
        }
    }
    fields.push_back(trim(current));
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') ++begin;  // from_chars rejects leading '+'
    const auto result = std::from_chars(begin, end, out);
    return result.ec == std::errc{} && result.ptr == end && !text.empty();
}

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

const char* sides_label(const TestSpec& spec) {
    if (spec.family == TestFamily::AnovaF) return "2";
    if (spec.family == TestFamily::BartholomewPermutation) return "1";
    return spec.sides == Sides::OneSided ? "1" : "2";
}

const char* variance_label(const TestSpec& spec) {
    if (spec.family == TestFamily::AnovaF ||
        spec.family == TestFamily::BartholomewPermutation)
        return "pooled";
    return spec.variance_mode == VarianceMode::Pooled ? "pooled" : "sandwich";
}

const char* estimand_label(const TestSpec& spec) {
    if (spec.family == TestFamily::GrandMeanMCTPava ||
        spec.family == TestFamily::BartholomewPermutation)
        return "pava";
    return "arithmetic";
}

const char* direction_label(const TestSpec& spec) {
    return spec.direction == Direction::Increasing ? "up" : "down";
}

}  // namespace

OneWayLayout ingest_csv(const std::string& path, const std::string& group_column,
                        const std::string& response_column,
                        const std::optional<std::vector<std::string>>& level_order) {
    if (group_column == response_column)
        throw ConfigError("group and response columns must differ");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);

    auto column_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        std::string available;
        for (const auto& h : header) {
            if (!available.empty()) available += ", ";
            available += h;
        }
        throw ConfigError(path + ": column '" + name +
                          "' not found (available: " + available + ")");
    };
    const std::size_t group_idx = column_index(group_column);
    const std::size_t response_idx = column_index(response_column);

    std::vector<std::string> levels;
    std::vector<std::vector<double>> groups;
    std::map<std::string, std::size_t> level_index;

    int line_number = 1;  // header was physical line 1
    int data_rows = 0;
    while (std::getline(in, line)) {
        ++line_number;
        bool blank = true;
        for (char ch : line)
            if (ch != '\r' && (std::isspace(static_cast<unsigned char>(ch)) == 0))
                blank = false;
        if (blank) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() <= std::max(group_idx, response_idx))
            throw DataError(path + ": line " + std::to_string(line_number) +
                            ": too few columns");
        const std::string& level = fields[group_idx];
        if (level.empty())
            throw DataError(path + ": line " + std::to_string(line_number) +
                            ": empty group label");
        double value = 0.0;
        if (!parse_double(fields[response_idx], value))
            throw DataError(path + ": line " + std::to_string(line_number) +
                            ": non-numeric response '" + fields[response_idx] + "'");
        if (!std::isfinite(value))
            throw DataError(path + ": line " + std::to_string(line_number) +
                            ": non-finite response");
        auto found = level_index.find(level);
        if (found == level_index.end()) {
            found = level_index.emplace(level, levels.size()).first;
            levels.push_back(level);
            groups.emplace_back();
        }
        groups[found->second].push_back(value);
        ++data_rows;
    }
    if (data_rows == 0) throw DataError(path + ": no data rows");

    if (level_order) {
        if (level_order->size() != levels.size()) {
            for (const auto& wanted : *level_order)
                if (level_index.find(wanted) == level_index.end())
                    throw ConfigError(path + ": level '" + wanted +
                                      "' in the requested order has no observations");
            throw ConfigError(path + ": level order does not cover all observed levels");
        }
        std::vector<std::string> new_levels;
        std::vector<std::vector<double>> new_groups;
        for (const auto& wanted : *level_order) {
            auto found = level_index.find(wanted);
            if (found == level_index.end())
                throw ConfigError(path + ": level '" + wanted +
                                  "' in the requested order has no observations");
            new_levels.push_back(wanted);
            new_groups.push_back(std::move(groups[found->second]));
        }
        levels = std::move(new_levels);
        groups = std::move(new_groups);
    }

    OneWayLayout layout;
    layout.levels = std::move(levels);
    layout.responses = std::move(groups);
    if (layout.responses.size() < 2)
        throw DataError(path + ": need at least two groups, found " +
                        std::to_string(layout.responses.size()));
    for (std::size_t i = 0; i < layout.responses.size(); ++i)
        if (layout.responses[i].size() < 2)
            throw DataError(path + ": group '" + layout.levels[i] +
                            "' has fewer than 2 observations");
    return layout;
}

AnalysisResult analyze(const AnalysisConfig& config) {
    if (config.tests.empty()) throw ConfigError("analysis: no tests requested");
    if (config.tests.size() != config.test_names.size())
        throw ConfigError("analysis: test/name bookkeeping mismatch");

    AnalysisResult result;
    result.layout = ingest_csv(config.input_path, config.group_column,
                               config.response_column, config.level_order);
    result.direction = config.direction;

    const GroupEstimates est = summarize(result.layout, VarianceMode::Pooled);
    std::vector<double> weights(est.group_sizes.begin(), est.group_sizes.end());
    const IsotonicFit fit = pava(std::span<const double>(est.means),
                                 std::span<const double>(weights), config.direction);
    for (std::size_t i = 0; i < est.means.size(); ++i) {
        GroupSummaryRow row;
        row.level = result.layout.levels[i];
        row.n = est.group_sizes[i];
        row.mean = est.means[i];
        row.sd = std::sqrt(est.group_variances[i]);
        row.isotonic_mean = fit.fitted[i];
        result.summary.push_back(std::move(row));
    }

    std::optional<ContrastMatrix> custom;
    if (config.custom_rows)
        custom = custom_contrasts(*config.custom_rows, result.layout.group_sizes());

    for (std::size_t t = 0; t < config.tests.size(); ++t) {
        const TestSpec& spec = config.tests[t];
        TestReport report;
        if (custom && (spec.family == TestFamily::GrandMeanMCT ||
                       spec.family == TestFamily::WilliamsMCT)) {
            report = mct_with_contrasts(result.layout, spec, *custom);
        } else if (custom && spec.family == TestFamily::GrandMeanMCTPava) {
            throw ConfigError(
                "custom contrasts are not supported for the order-restricted family "
                "(its rows are tied to the grand-mean construction)");
        } else {
            report = run_test(result.layout, spec);
        }
        result.test_names.push_back(config.test_names[t]);
        result.reports.push_back(std::move(report));
    }
    return result;
}

std::string render_analysis_text(const AnalysisResult& result) {
    std::ostringstream out;
    char buffer[256];
    out << "Groups (control = " << result.layout.levels.front() << ", direction "
        << (result.direction == Direction::Increasing ? "up" : "down") << "):\n";
    std::snprintf(buffer, sizeof(buffer), "  %-12s %5s %14s %14s %14s\n", "level", "n",
                  "mean", "sd", "isotonic-mean");
    out << buffer;
    for (const auto& row : result.summary) {
        std::snprintf(buffer, sizeof(buffer), "  %-12s %5d %14.6g %14.6g %14.6g\n",
                      row.level.c_str(), row.n, row.mean, row.sd, row.isotonic_mean);
        out << buffer;
    }
    out << '\n';
    for (std::size_t t = 0; t < result.reports.size(); ++t) {
        const TestReport& report = result.reports[t];
        const TestSpec& spec = report.method;
        out << "== " << result.test_names[t] << " (" << family_name(spec.family)
            << ", sides=" << sides_label(spec) << ", variance=" << variance_label(spec)
            << ", estimand=" << estimand_label(spec)
            << ", direction=" << direction_label(spec) << ")\n";
        out << "  df = " << report.df << "\n";
        out << "  statistics =";
        for (double s : report.statistics) out << ' ' << format_double(s);
        out << "\n  adjusted p =";
        for (double p : report.adjusted_p) out << ' ' << format_double(p);
        out << "\n  global p = " << format_double(report.global_p) << "\n";
        if (report.confidence_intervals) {
            out << "  simultaneous " << format_double(100.0 * (1.0 - spec.alpha))
                << "% confidence intervals:\n";
            for (const auto& ci : *report.confidence_intervals)
                out << "    [" << format_double(ci[0]) << ", " << format_double(ci[1])
                    << "]\n";
        }
        if (spec.family == TestFamily::BartholomewPermutation)
            out << "  permutations = " << spec.permutations << "\n";
        if (report.mvt_error_bound > 0.0)
            out << "  integration error bound = " << format_double(report.mvt_error_bound)
                << "\n";
        out << '\n';
    }
    return out.str();
}

namespace {

json report_to_json(const std::string& name, const TestReport& report) {
    const TestSpec& spec = report.method;
    json jt;
    jt["name"] = name;
    jt["family"] = family_name(spec.family);
    jt["sides"] = std::string(sides_label(spec)) == "1" ? 1 : 2;
    jt["variance"] = variance_label(spec);
    jt["estimand"] = estimand_label(spec);
    jt["direction"] = direction_label(spec);
    jt["alpha"] = spec.alpha;
    jt["df"] = report.df;
    jt["statistics"] = report.statistics;
    jt["adjusted_p"] = report.adjusted_p;
    jt["global_p"] = report.global_p;
    if (report.confidence_intervals) {
        json intervals = json::array();
        for (const auto& ci : *report.confidence_intervals) {
            json pair = json::array();
            pair.push_back(std::isfinite(ci[0]) ? json(ci[0]) : json());
            pair.push_back(std::isfinite(ci[1]) ? json(ci[1]) : json());
            intervals.push_back(std::move(pair));
        }
        jt["confidence_intervals"] = std::move(intervals);
    }
    if (spec.family == TestFamily::BartholomewPermutation)
        jt["permutations"] = spec.permutations;
    jt["mvt_error_bound"] = report.mvt_error_bound;
    return jt;
}

}  // namespace

std::string render_analysis_json(const AnalysisResult& result) {
    json j;
    j["control"] = result.layout.levels.front();
    j["direction"] = result.direction == Direction::Increasing ? "up" : "down";
    json groups = json::array();
    for (const auto& row : result.summary) {
        json jg;
        jg["level"] = row.level;
        jg["n"] = row.n;
        jg["mean"] = row.mean;
        jg["sd"] = row.sd;
        jg["isotonic_mean"] = row.isotonic_mean;
        groups.push_back(std::move(jg));
    }
    j["groups"] = std::move(groups);
    json tests = json::array();
    for (std::size_t t = 0; t < result.reports.size(); ++t)
        tests.push_back(report_to_json(result.test_names[t], result.reports[t]));
    j["tests"] = std::move(tests);
    return j.dump(2) + "\n";
}

std::string render_analysis_csv(const AnalysisResult& result) {
    std::string out =
        "test,family,sides,variance_mode,estimand,direction,df,contrast,statistic,"
        "adjusted_p,global_p,ci_lower,ci_upper\n";
    for (std::size_t t = 0; t < result.reports.size(); ++t) {
        const TestReport& report = result.reports[t];
        const TestSpec& spec = report.method;
        for (std::size_t h = 0; h < report.statistics.size(); ++h) {
            out += result.test_names[t];
            out += ',';
            out += family_name(spec.family);
            out += ',';
            out += sides_label(spec);
            out += ',';
            out += variance_label(spec);
            out += ',';
            out += estimand_label(spec);
            out += ',';
            out += direction_label(spec);
            out += ',';
            out += std::to_string(report.df);
            out += ',';
            out += std::to_string(h + 1);
            out += ',';
            out += format_double(report.statistics[h]);
            out += ',';
            out += format_double(report.adjusted_p[h]);
            out += ',';
            out += format_double(report.global_p);
            if (report.confidence_intervals) {
                out += ',';
                out += format_double((*report.confidence_intervals)[h][0]);
                out += ',';
                out += format_double((*report.confidence_intervals)[h][1]);
            } else {
                out += ",,";
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace trendmct
