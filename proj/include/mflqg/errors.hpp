#pragma once

#include <stdexcept>
#include <string>

namespace mflqg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a model or cost fails one of its structural invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotSymmetric : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotPositiveDefinite : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotPositiveSemidefinite : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A linear solve hit a pivot below tolerance inside a recursion.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class OutOfOrderUpdate : public Error {
 public:
  using Error::Error;
};

class IncompatibleStrategy : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

// Malformed model or gain files. Carries line/column context when available.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mflqg
