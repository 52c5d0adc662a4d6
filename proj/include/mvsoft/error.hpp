#ifndef MVSOFT_ERROR_HPP_
#define MVSOFT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mvsoft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures of the numbers themselves (NaN/Inf inputs, degenerate vectors,
// values escaping their domain). The CLI reports these with exit code 2;
// everything else — bad configs, bad shapes, unsatisfiable requests — is a
// usage error and exits 1.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public NumericError {
 public:
  using NumericError::NumericError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateNorm : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidCosine : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidProbability : public NumericError {
 public:
  using NumericError::NumericError;
};

// Raised when a loss or gradient comes out NaN/Inf; indicates a bug or a
// numerically hostile configuration, never an expected outcome.
class NonFiniteLoss : public NumericError {
 public:
  using NumericError::NumericError;
};

class InfeasibleSpec : public Error {
 public:
  using Error::Error;
};

class InsufficientNegatives : public Error {
 public:
  using Error::Error;
};

class MissingGalleryIdentity : public Error {
 public:
  using Error::Error;
};

class EmptySweep : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvsoft

#endif  // MVSOFT_ERROR_HPP_
