#pragma once

#include <stdexcept>
#include <string>

namespace waveqed {

// Error taxonomy shared by all modules. Everything derives from Error so
// callers can catch the family with one handler; the CLI maps the concrete
// types onto exit codes.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/axis mismatches in tensor operations.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid argument values (bad bond index, non-normalized local vector, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Backend numerical failures (SVD non-convergence, singular linear system).
struct NumericError : Error {
    using Error::Error;
};

// Physically inconsistent model input (unstable quadratic form, local
// dimension overflow, overlapping scatterers).
struct ModelError : Error {
    using Error::Error;
};

// Malformed or out-of-range configuration input.
struct ConfigError : Error {
    using Error::Error;
};

// A run outgrew its configured resource caps (bond dimension hard cap).
struct ResourceError : Error {
    using Error::Error;
};

// An iterative procedure failed to converge within its budget.
struct ConvergenceError : Error {
    using Error::Error;
};

} // namespace waveqed
