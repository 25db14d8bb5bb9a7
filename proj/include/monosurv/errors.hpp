#pragma once

#include <stdexcept>
#include <string>

namespace monosurv {

// Bad flags, bad arguments, misuse of an API contract. CLI exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid network or grid configuration. CLI exit code 3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad runtime inputs: dimension mismatches, non-finite values, unsorted grids. CLI exit code 3.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed files (CSV, JSON documents). CLI exit code 3.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization failed (non-finite loss after recovery, all trials failed). CLI exit code 4.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// A metric is undefined on the given data (e.g. no comparable pairs).
struct UndefinedMetricError : std::runtime_error {
    explicit UndefinedMetricError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace monosurv
