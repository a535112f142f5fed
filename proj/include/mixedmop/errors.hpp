#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mixedmop {

/// Base class of every error raised by the library. `code()` is a short
/// machine-readable identifier used by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Malformed input: bad multi-indices, invalid weights, unparsable config.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation_error", what) {}
};

/// Numerical failures (rank deficiency, quadrature not converging, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A requested quadrature did not reach its tolerance.
class AccuracyFailure : public NumericalError {
 public:
  AccuracyFailure(const std::string& what, double achieved)
      : NumericalError("accuracy_failure", what), achieved_(achieved) {}
  double achieved_bound() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The evaluation point lies inside the band |x - y| <= delta_diag where the
/// Christoffel-Darboux quotient is cancellation-dominated.
class DiagonalRegion : public NumericalError {
 public:
  explicit DiagonalRegion(const std::string& what) : NumericalError("diagonal_region", what) {}
};

}  // namespace mixedmop
