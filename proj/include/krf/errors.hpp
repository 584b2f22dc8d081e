#pragma once

#include <stdexcept>
#include <string>

namespace krf {

// Contract violations on mathematically invalid inputs (non-Kähler class,
// out-of-range coordinates, wrong scenario, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing configuration (grid too coarse, malformed config file, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A quantity that must stay strictly positive (metric eigenvalue, trace
// denominator) degenerated numerically.
struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

// One implicit time step failed to converge; the caller may retry with a
// smaller dt.
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// The adaptive stepper ran out of admissible step sizes before reaching the
// configured stop time.
struct SingularityReached : std::runtime_error {
    SingularityReached(const std::string& msg, double t_reached)
        : std::runtime_error(msg), t(t_reached) {}
    double t;
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace krf
