#pragma once

#include <stdexcept>
#include <string>

namespace frest {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed data: non-finite values, dimension mismatches, parse failures.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

/// A configuration value outside its documented range.
class InvalidParameterError : public Error {
public:
  using Error::Error;
};

/// An operation applied in the wrong transform state (e.g. double FFT).
class StateError : public Error {
public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance; carries the residual.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_ = 0.0;
};

/// Matrix factorization failed (e.g. covariance not positive definite).
class DecompositionError : public Error {
public:
  using Error::Error;
};

/// Too few samples for the requested estimator.
class InsufficientSamplesError : public Error {
public:
  using Error::Error;
};

/// Training diverged; carries the epoch at which the loss became non-finite.
class TrainingFailureError : public Error {
public:
  TrainingFailureError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

private:
  int epoch_ = 0;
};

}  // namespace frest
