#pragma once

#include <cstddef>
#include <vector>

#include "gridres/problem.hpp"
#include "gridres/qp.hpp"

namespace gridres::convex {

struct Options {
  /// Interior-point stopping tolerance (relative residuals and gap).
  double tolerance = 1e-11;
  int max_iterations = 200;
  /// Weight of Σ(c + d) in scaled units; breaks ties towards low throughput.
  double throughput_weight = 1e-8;
  /// min(c, d) above this fraction of the energy scale counts as simultaneous charge/discharge.
  double complementarity_tol = 1e-7;
};

struct ProgramCounts {
  int variables = 0;
  int equalities = 0;
  int inequalities = 0;
  /// Finite variable bounds (one per finite side).
  int bounds = 0;
};

/// Epigraph form of one horizon problem. Per step the variables are charge c,
/// discharge d, stored energy b, the hinge epigraph θ and, with a SoC penalty,
/// the SoC hinge epigraph β'. Energies are divided by `scale` so the solver sees
/// numbers of order one.
struct EpigraphProgram {
  ProblemSpec spec;
  qp::Problem qp;
  double scale = 1.0;
  bool soc = false;

  int stride() const { return soc ? 5 : 4; }
  int c(std::size_t i) const { return int(i) * stride(); }
  int d(std::size_t i) const { return int(i) * stride() + 1; }
  int b(std::size_t i) const { return int(i) * stride() + 2; }
  int theta(std::size_t i) const { return int(i) * stride() + 3; }
  int beta(std::size_t i) const { return int(i) * stride() + 4; }

  ProgramCounts counts() const;
  /// Converts a solver objective back to the problem's units.
  double unscale(double f) const;
};

/// Closed-form size of the program for a horizon of n steps.
ProgramCounts expected_counts(std::size_t n, bool soc_penalty);

EpigraphProgram build(const ProblemSpec& spec, const Options& opt = {});

/// Solves the program and audits the answer: the trajectory is rebuilt from
/// (c, d), avoidable simultaneous charge/discharge is removed when that does not
/// raise the cost, and the reported objective is recomputed from s and b.
/// Throws NonConvergence when the interior-point method stalls.
DispatchResult solve(const EpigraphProgram& program, const Options& opt = {});

inline DispatchResult optimize(const ProblemSpec& spec, const Options& opt = {}) { return solve(build(spec, opt), opt); }

/// Steps where min(c, d) exceeds tol.
std::size_t count_simultaneous(const std::vector<double>& charge, const std::vector<double>& discharge, double tol);

}  // namespace gridres::convex
