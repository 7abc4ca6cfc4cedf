#pragma once

#include <stdexcept>
#include <string>

namespace precis {

enum class ErrorKind {
  Domain,          // evaluation outside (0,1) or an invalid numeric argument
  Parameter,       // out-of-range configuration value
  Spec,            // rule spec violates one of its invariants
  NonConvergence,  // quadrature hit its subdivision cap
  NonNormalizable, // divergent mean reward
  Degenerate,      // constant rule, normalization impossible
  Approximation,   // polynomial construction could not reach its target
  State,           // inconsistent expert state (k > n, ...)
  Horizon,         // stopping-policy horizon could not be certified
  Io,              // file read/write failure
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the best available estimate when adaptive refinement gives up.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(std::string msg, double value, double error_estimate)
      : Error(ErrorKind::NonConvergence, std::move(msg)),
        value_(value),
        error_estimate_(error_estimate) {}
  double value() const noexcept { return value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

class ApproximationError : public Error {
 public:
  ApproximationError(std::string msg, double achieved_gap)
      : Error(ErrorKind::Approximation, std::move(msg)), gap_(achieved_gap) {}
  double achieved_gap() const noexcept { return gap_; }

 private:
  double gap_;
};

}  // namespace precis
