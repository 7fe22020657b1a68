#pragma once

#include <stdexcept>
#include <string>

namespace rsav {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters or configuration files.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable input data.
class InputError : public Error {
public:
    using Error::Error;
};

/// Degenerate elements or invalid coefficients during assembly.
class AssemblyError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Outcome of an iterative solve.
struct SolveReport {
    int iterations = 0;
    /// ||A x - rhs|| / ||rhs||
    double relative_residual = 0.0;
    /// ||A x - rhs|| / (||A|| ||x|| + ||rhs||), the quantity tested against tol
    double backward_error = 0.0;
    bool converged = false;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, SolveReport report) : Error(what), report_(report) {}
    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

/// Raised when a time step produces non-finite values or breaks admissibility.
class StepError : public Error {
public:
    StepError(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

} // namespace rsav
