#pragma once

#include <stdexcept>
#include <string>

namespace sacd {

/// Invalid or inconsistent configuration. Maps to exit code 1 in the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A NaN appeared in a gradient or a metric. Maps to exit code 2.
struct NanAbortError : std::runtime_error {
    explicit NanAbortError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / serialization failure. Maps to exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sacd
