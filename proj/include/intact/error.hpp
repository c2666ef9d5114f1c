#pragma once

#include <stdexcept>
#include <string>

namespace intact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a value (not a shape) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterate or function value became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training objective grew past the divergence guard.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// File missing, unreadable, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace intact
