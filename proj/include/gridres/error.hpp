#pragma once

#include <stdexcept>
#include <string>

namespace gridres {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data, files or configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A battery transition would leave [b_min, b_max].
class BoundViolation : public Error {
 public:
  enum class Side { Lower, Upper };

  BoundViolation(Side side, const std::string& what) : Error(what), side_(side) {}

  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

/// The convex solver hit its iteration limit.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double primal_residual, double dual_residual, double gap)
      : Error(what), primal_residual_(primal_residual), dual_residual_(dual_residual), gap_(gap) {}

  double primal_residual() const noexcept { return primal_residual_; }
  double dual_residual() const noexcept { return dual_residual_; }
  double gap() const noexcept { return gap_; }

 private:
  double primal_residual_;
  double dual_residual_;
  double gap_;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Exact MIP refused because the horizon exceeds the configured cap.
class HorizonTooLong : public Error {
 public:
  using Error::Error;
};

}  // namespace gridres
