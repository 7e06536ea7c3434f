#ifndef TRANSLAB_ERROR_HPP
#define TRANSLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace translab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or region lies outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is out of its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A constructed object violates a support requirement (e.g. support touching the boundary).
class SupportError : public Error {
 public:
  using Error::Error;
};

/// A characteristic left the closed domain by more than the clamping tolerance.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Study configuration could not be parsed or failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace translab

#endif  // TRANSLAB_ERROR_HPP
