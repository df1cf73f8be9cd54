#pragma once

#include <stdexcept>
#include <string>

namespace twoplayer {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Sylvester/Lyapunov operator (numerically) singular.
struct SingularEquationError : Error {
    using Error::Error;
};

// Eigenvalue inside the imaginary-axis band where a stable/antistable split is requested.
struct AxisEigenvalueError : Error {
    using Error::Error;
};

enum class AreFailure { singular_weight, not_stabilizable, axis_rank, numerical };

struct AreError : Error {
    AreFailure reason;
    AreError(AreFailure r, const std::string& msg) : Error(msg), reason(r) {}
};

struct AssumptionError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

struct ScaleGuardError : Error {
    using Error::Error;
};

const char* to_string(AreFailure f);

}  // namespace twoplayer
