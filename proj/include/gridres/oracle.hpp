#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gridres/problem.hpp"

namespace gridres::oracle {

struct OracleConfig {
  /// Grid points per step across [s_lo, s_hi]; odd so 0 is always a point.
  int levels = 21;
  std::size_t max_n = 4;
  /// Pattern-search rounds around the best grid trajectory (11 points per step,
  /// radius shrinking each round). Needed for quadratic costs, where optima fall
  /// between grid points; 0 gives the plain grid search.
  int refine_rounds = 16;
  double refine_shrink = 0.35;
  bool parallel = true;

  void validate() const;
};

/// Candidate energies for step i from state b_prev: the uniform grid plus the
/// analytic targets (0, −Δh, −Δh ± εP_g h, range ends, SoC band edges and midpoint),
/// sorted and deduplicated.
std::vector<double> candidates(const ProblemSpec& spec, std::size_t i, double b_prev, int levels);

/// Exhaustive search over trajectories built from `candidates`, simulating the
/// battery exactly. A step may also be left open and solved afterwards from a
/// later step that sits on a target while its stored energy sits on a bound or
/// SoC breakpoint; with those chains every vertex of every piecewise-linear
/// region is visited, so linear costs are solved exactly. Quadratic costs are
/// then refined by pattern search. Ties go to the lexicographically smallest
/// trajectory, comparing steps by |s| and then by s.
DispatchResult brute_force(const ProblemSpec& spec, const OracleConfig& cfg = {});

/// Same search without OpenMP; reference for the parallel path.
DispatchResult brute_force_serial(const ProblemSpec& spec, OracleConfig cfg = {});

}  // namespace gridres::oracle
