#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gridres/problem.hpp"
#include "gridres/qp.hpp"

namespace gridres::mip {

/// Binary variables per step: u (charging allowed), z (residual sign) and, with
/// a SoC penalty, z2 (SoC above the band midpoint).
enum class BinaryKind : int { U = 0, Z = 1, Z2 = 2 };

/// A binary is free (-1) or fixed to 0/1.
using Fixing = std::vector<std::int8_t>;

/// Exact mixed-integer form of a horizon problem.
///
/// Per step: charge c ∈ [0, S_max·u], discharge d ∈ [0, −S_min·(1−u)], stored
/// energy b, residual r = Δh + c − d, y = z·r through its McCormick envelope on
/// r ∈ [Δh + S_min, Δh + S_max], the sign link 2y − r ≥ 0 and θ ≥ 2y − r − εP_g h.
/// With a SoC penalty also y2 = z2·SoC on [SoC_min, SoC_max], the link
/// (2z2 − 1)(SoC − SoC̄) ≥ 0 and β ≥ λ(2y2 − 2z2·SoC̄ − SoC + SoC̄ − γ).
struct MipProgram {
  ProblemSpec spec;
  double scale = 1.0;
  bool soc = false;
  /// Binaries decided by the variable bounds alone (sign of r or SoC known).
  Fixing root;
  /// Adds the valid inequalities θ ≥ ±r − εP_g h and β ≥ λ(SoC − SoC_u), λ(SoC_l − SoC).
  /// Without them the relaxation lets y = r/2 and θ = 0, so its bound is near zero.
  bool tightened = true;

  std::size_t horizon() const { return spec.horizon(); }
  int binaries_per_step() const { return soc ? 3 : 2; }
  std::size_t binary(std::size_t i, BinaryKind k) const { return i * std::size_t(binaries_per_step()) + std::size_t(k); }
  std::size_t num_binaries() const { return horizon() * std::size_t(binaries_per_step()); }

  /// Continuous relaxation with the given binaries fixed.
  qp::Problem relaxation(const Fixing& fix) const;
  /// Exact feasibility test of that relaxation by propagating the reachable energy interval.
  bool relaxation_feasible(const Fixing& fix) const;

  double unscale(double f) const;

  // Variable layout inside a relaxation.
  int stride() const { return soc ? 10 : 7; }
  int c(std::size_t i) const { return int(i) * stride(); }
  int d(std::size_t i) const { return c(i) + 1; }
  int u(std::size_t i) const { return c(i) + 2; }
  int b(std::size_t i) const { return c(i) + 3; }
  int theta(std::size_t i) const { return c(i) + 4; }
  int z(std::size_t i) const { return c(i) + 5; }
  int y(std::size_t i) const { return c(i) + 6; }
  int beta(std::size_t i) const { return c(i) + 7; }
  int z2(std::size_t i) const { return c(i) + 8; }
  int y2(std::size_t i) const { return c(i) + 9; }
  int var_of(std::size_t binary_index) const;
};

struct Options {
  /// Default cap on the horizon accepted for the exact solve.
  std::size_t max_horizon = 24;
  std::size_t max_nodes = 200000;
  /// Relative optimality gap at which a node is pruned.
  double gap_tol = 1e-7;
  bool tighten = true;
  /// Interior-point tolerance for node relaxations.
  double qp_tolerance = 1e-11;
};

/// Throws HorizonTooLong above opt.max_horizon.
MipProgram build_mip(const ProblemSpec& spec, const Options& opt = {});

struct MipResult {
  DispatchResult dispatch;
  /// Binary values of the returned trajectory, indexed like MipProgram::binary.
  std::vector<int> binaries;
};

/// Depth-first branch and bound with interior-point node relaxations. Branches on
/// the most fractional binary among those whose relaxed value lets the relaxation
/// undercut the true cost (earliest step wins ties). Leaves stats.certified false
/// when the node budget runs out or a relaxation fails.
MipResult branch_and_bound(const MipProgram& program, const Options& opt = {});

inline MipResult solve(const ProblemSpec& spec, const Options& opt = {}) {
  return branch_and_bound(build_mip(spec, opt), opt);
}

}  // namespace gridres::mip
