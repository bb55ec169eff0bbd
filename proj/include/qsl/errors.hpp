#pragma once

#include <stdexcept>
#include <string>

namespace qsl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not conform (non-square input, mismatched sizes, rank out of range).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or has the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical pipeline itself.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The anchor diagonal block does not have the requested rank.
class AssumptionViolation : public NumericalError {
 public:
  AssumptionViolation(const std::string& what, long observed_rank)
      : NumericalError(what), observed_rank_(observed_rank) {}
  long observed_rank() const { return observed_rank_; }

 private:
  long observed_rank_;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qsl
