#pragma once

#include <stdexcept>
#include <string>

namespace qbm2 {

// Root of every library error. The CLI maps ConfigError to exit code 2 and
// everything else to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Quadrature that did not reach its tolerance.
class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double estimate, double error_estimate, double l1_norm);

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }
    double l1_norm() const noexcept { return l1_norm_; }

private:
    double estimate_;
    double error_estimate_;
    double l1_norm_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

// The boundary-value problem at this horizon has no unique solution
// (a focal time of the elementary functions).
class DegenerateHorizonError : public NumericalError {
public:
    DegenerateHorizonError(const std::string& what, double horizon);
    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

// Coefficients diverge at this time (du1(t) = 0).
class SingularCoefficientError : public NumericalError {
public:
    SingularCoefficientError(const std::string& what, double time);
    double time() const noexcept { return time_; }

private:
    double time_;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

// A Gaussian exponent that cannot be integrated.
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace qbm2
