#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace microtrap {

// Malformed or inconsistent run configuration. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested evaluation point lies on (or numerically on) a coil filament,
// where the field diverges. Carries the offending coil so callers can report
// which loop was hit. CLI maps this to exit code 3.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& msg, std::size_t coil_index)
        : std::runtime_error(msg), coil_index(coil_index) {}
    std::size_t coil_index;
};

// Problem size exceeds a hard implementation limit (e.g. dense spin states).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace microtrap
