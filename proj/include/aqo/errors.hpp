// Exception taxonomy shared by all modules.  The C API and the CLI map these
// onto stable error codes, so new failure modes should reuse one of them.
#pragma once

#include <stdexcept>
#include <string>

namespace aqo {

/// Bad user input: malformed specs, dimension mismatches, out-of-range values.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation could not reach the requested accuracy or produced
/// non-finite values (eigensolver breakdown, ambiguous rank decisions, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The problem structure violates a precondition of the requested analysis:
/// eigenvalue crossings along the path, vanishing gaps between tracked
/// blocks, or multi-dimensional blocks where one-dimensional ones are needed.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Request exceeds the dense-storage design limits (e.g. too many qubits).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace aqo
