#pragma once

#include <stdexcept>
#include <string>

namespace nilmtree {

// Base for everything thrown by the library. The CLI maps subclasses to
// distinct exit codes, so new error kinds should subclass rather than
// throw std::runtime_error directly.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: unknown keys, out-of-range parameters, malformed
// config files, contradictory flags.
struct ConfigError : Error {
    using Error::Error;
};

// Bad input data: unreadable files, malformed CSV, misaligned channels,
// series too short for the requested window size.
struct DataError : Error {
    using Error::Error;
};

// Numerical failure inside the relaxation solver (non-convergence in
// strict mode, eigendecomposition breakdown).
struct SolverError : Error {
    using Error::Error;
};

}  // namespace nilmtree
