#pragma once

#include <stdexcept>
#include <string>

namespace solarinv {

/// Error categories. The CLI maps each one onto a process exit code.
enum class ErrorKind {
    Validation,     ///< bad parameter values
    Domain,         ///< argument outside an operation's domain
    Configuration,  ///< inconsistent run settings (horizon, paths, ...)
    Numerical,      ///< quadrature / recurrence failure
    Solver,         ///< root bracketing or convergence failure
    Singularity,    ///< ODE denominator vanished
    Integration,    ///< invariant violated while integrating the boundary ODE
    Simulation,     ///< non-finite state in a simulated path
    Verification,   ///< a statistical or analytic check failed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(ErrorKind::Validation, field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& what) : Error(ErrorKind::Configuration, what) {}
};

/// Quadrature or recurrence failure; carries the tolerance that was reached.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved_tolerance)
        : Error(ErrorKind::Numerical, what), achieved_(achieved_tolerance) {}
    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

class SingularityError : public Error {
public:
    SingularityError(double y, double z, const std::string& what)
        : Error(ErrorKind::Singularity, what), y_(y), z_(z) {}
    double y() const noexcept { return y_; }
    double z() const noexcept { return z_; }

private:
    double y_, z_;
};

class IntegrationError : public Error {
public:
    IntegrationError(double y, const std::string& what) : Error(ErrorKind::Integration, what), y_(y) {}
    double y() const noexcept { return y_; }

private:
    double y_;
};

class SimulationError : public Error {
public:
    explicit SimulationError(const std::string& what) : Error(ErrorKind::Simulation, what) {}
};

class VerificationError : public Error {
public:
    explicit VerificationError(const std::string& what) : Error(ErrorKind::Verification, what) {}
};

/// 0 success, 2 configuration/validation, 3 verification failure, 4 numerical solver failure.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation:
        case ErrorKind::Domain:
        case ErrorKind::Configuration:
            return 2;
        case ErrorKind::Verification:
            return 3;
        default:
            return 4;
    }
}

}  // namespace solarinv
