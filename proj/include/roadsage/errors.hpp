#pragma once

#include <stdexcept>
#include <string>

namespace roadsage {

// Bad CLI flags, malformed config documents, parameters out of range.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures, referential errors, schema violations in data files.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses or parameters encountered during training.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace roadsage
