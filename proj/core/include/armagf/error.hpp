#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace armagf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/operator sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Arguments violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear system or eigenproblem was singular or too ill-conditioned.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A closed-form response was evaluated at (or numerically on) a pole.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, std::complex<double> location)
      : Error(what), location_(location) {}
  std::complex<double> location() const noexcept { return location_; }

 private:
  std::complex<double> location_;
};

/// A recursion left the representable range. Carries the round at which the
/// state norm crossed the threshold and the offending branch.
class DivergenceError : public Error {
 public:
  DivergenceError(long round, std::size_t branch, double norm);
  long round() const noexcept { return round_; }
  std::size_t branch() const noexcept { return branch_; }
  double norm() const noexcept { return norm_; }

 private:
  long round_;
  std::size_t branch_;
  double norm_;
};

}  // namespace armagf
