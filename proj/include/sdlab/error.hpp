#pragma once

#include <stdexcept>
#include <string>

namespace sdlab {

/// Invalid configuration: unsupported dimension/depth, mismatched atoms or measures, malformed tables.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (exponent constraints, λ ≤ 0, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A quantity cannot be represented at the available grid resolution.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Input exceeds the hard cap of an exhaustive algorithm.
struct SizeError : std::length_error {
    using std::length_error::length_error;
};

/// The stopping-time construction failed to stabilise; `dump` holds the serialized state.
struct CounterexampleCandidate : std::runtime_error {
    CounterexampleCandidate(const std::string& what, std::string state)
        : std::runtime_error(what), dump(std::move(state)) {}
    std::string dump;
};

} // namespace sdlab
