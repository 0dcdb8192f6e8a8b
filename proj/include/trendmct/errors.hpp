#pragma once

#include <stdexcept>
#include <string>

namespace trendmct {

// Error taxonomy mapped to process exit codes:
//   ConfigError  -> 2  (bad flags, malformed config/contrast files, inconsistent options)
//   DataError    -> 3  (invalid designs, unparseable data, degenerate inputs)
//   NumericError -> 4  (integration/root-finding failures, non-PSD correlation)
class TrendError : public std::runtime_error {
public:
    TrendError(std::string message, int exit_code)
        : std::runtime_error(std::move(message)), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public TrendError {
public:
    explicit ConfigError(const std::string& message) : TrendError(message, 2) {}
};

class DataError : public TrendError {
public:
    explicit DataError(const std::string& message) : TrendError(message, 3) {}
};

class NumericError : public TrendError {
public:
    explicit NumericError(const std::string& message) : TrendError(message, 4) {}
};

}  // namespace trendmct
