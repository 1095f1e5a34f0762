#pragma once

#include <stdexcept>
#include <string>

namespace ppolar {

// Error taxonomy used across the library.  Everything derives from Error so
// callers can catch coarsely; the CLI maps the leaf types to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// caller passed something structurally invalid (bad prime, shape mismatch, ...)
struct UsageError : Error {
    using Error::Error;
};

struct DivisionByZeroError : Error {
    using Error::Error;
};

// all retained digits cancelled; the valuation of the result is unknowable
// at the working precision
struct InsufficientPrecisionError : Error {
    using Error::Error;
};

// retry-with-doubling ran past the global precision cap
struct PrecisionCapError : Error {
    using Error::Error;
};

struct NotASquareError : Error {
    using Error::Error;
};

struct SingularToPrecisionError : Error {
    using Error::Error;
};

struct RankDeficientError : Error {
    using Error::Error;
};

struct DegenerateFormError : Error {
    using Error::Error;
};

struct NotRepresentedError : Error {
    using Error::Error;
};

struct InvariantMismatchError : Error {
    using Error::Error;
};

// a "cannot happen" condition happened; indicates a bug, never user input
struct InternalInvariantError : Error {
    using Error::Error;
};

}  // namespace ppolar
