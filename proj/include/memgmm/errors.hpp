#pragma once

#include <stdexcept>
#include <string>

namespace memgmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A factorization or solve failed on inputs that passed validation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Data too degenerate for the requested estimate (zero range, rank deficiency).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Every restart of a mixture fit failed.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace memgmm
