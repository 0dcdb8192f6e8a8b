#pragma once

// Dataset ingestion and the analysis front end: run a battery of tests on one
// observed data set and render the reports as text, JSON, or CSV.

#include <optional>
#include <string>
#include <vector>

#include "trendmct/tests.hpp"

namespace trendmct {

enum class OutputFormat { Text, Json, Csv };

struct AnalysisConfig {
    std::string input_path;
    std::string group_column = "group";
    std::string response_column = "response";
    // If given, defines the dose order (first level = control) and must be a
    // permutation of the observed labels; otherwise first-appearance order.
    std::optional<std::vector<std::string>> level_order;
    std::vector<TestSpec> tests;
    std::vector<std::string> test_names;  // parallel to tests
    // Optional user-supplied contrast rows; applied to the arithmetic-means
    // MCT families in place of their built-in rows.
    std::optional<std::vector<std::vector<double>>> custom_rows;
    Direction direction = Direction::Increasing;  // for the summary's isotonic column
    OutputFormat output = OutputFormat::Text;
};

// Parse a UTF-8 CSV with a header row. Physical line numbers (header = line
// 1) are used in diagnostics. Non-numeric or non-finite responses, groups
// with fewer than two observations, and empty files are data errors; missing
// columns and inconsistent level orders are config errors.
OneWayLayout ingest_csv(const std::string& path, const std::string& group_column,
                        const std::string& response_column,
                        const std::optional<std::vector<std::string>>& level_order);

struct GroupSummaryRow {
    std::string level;
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double isotonic_mean = 0.0;  // PAVA fit of the group means
};

struct AnalysisResult {
    OneWayLayout layout;
    Direction direction = Direction::Increasing;
    std::vector<GroupSummaryRow> summary;
    std::vector<std::string> test_names;
    std::vector<TestReport> reports;
};

AnalysisResult analyze(const AnalysisConfig& config);

std::string render_analysis_text(const AnalysisResult& result);
std::string render_analysis_json(const AnalysisResult& result);
std::string render_analysis_csv(const AnalysisResult& result);

}  // namespace trendmct
