#pragma once

#include <stdexcept>
#include <string>

namespace mixop {

// Error categories map onto CLI exit codes: argument/config/hypothesis
// problems are usage errors, numeric/estimation failures are numeric errors.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis the requested experiment relies on does not hold.
class HypothesisError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Non-finite or otherwise invalid data encountered during evaluation.
class DataError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mixop
