#pragma once

#include <stdexcept>
#include <string>

namespace tsslab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent parameter values.
class ParameterError : public Error {
public:
    using Error::Error;
};

// An equilibrium formula left its arcsin domain.
class NoEquilibriumError : public Error {
public:
    using Error::Error;
};

class AlgebraicSolveError : public Error {
public:
    AlgebraicSolveError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Non-finite state during time stepping.
class IntegrationBlowup : public Error {
public:
    IntegrationBlowup(const std::string& what, double t) : Error(what), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

// Reactive current alone exceeds the converter capacity circle.
class CapacityExhausted : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// Well-formed input that asks for something unusable, e.g. no methods.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Degenerate geometry, e.g. a saddle with a vanishing eigenvalue.
class DegenerateError : public Error {
public:
    using Error::Error;
};

} // namespace tsslab
