#pragma once

#include <stdexcept>
#include <string>

namespace qshard {

/// Bad argument to a library call (out-of-range qubit, malformed bits, ...).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Global amplitude index outside 0..2^nq-1.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Inconsistent run configuration (rank count, group split, storage caps).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Message-passing failure: tag/length mismatch, deadlock, peer death.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Projective measurement on a zero-probability outcome.
struct MeasurementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qshard
