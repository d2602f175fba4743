#pragma once

#include <stdexcept>
#include <string>

namespace surge_lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: reversed interval endpoints, non-positive rates, bad JSON fields.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a function (tau <= 0, negative horizon, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Quadrature produced a non-finite value or an iteration failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Unsupported combination of options, e.g. a pricing family the solver cannot search.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A calibration target that cannot be met with the requested pricing family.
class InfeasibleTargetError : public Error {
public:
    using Error::Error;
};

}  // namespace surge_lab
