#include "gridres/opt_convex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridres/error.hpp"

namespace gridres::convex {

namespace {

// Largest energy magnitude in the problem; used to bring the program to O(1).
double energy_scale(const ProblemSpec& spec) {
  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  double e = std::max({bat.s_max(h), -bat.s_min(h), std::abs(bat.b_max), std::abs(bat.b_min), std::abs(spec.b0)});
  for (std::size_t i = 0; i < spec.horizon(); ++i) e = std::max({e, std::abs(spec.delta_energy(i)), spec.band_energy(i)});
  return e > 0.0 ? e : 1.0;
}

}  // namespace

ProgramCounts expected_counts(std::size_t n, bool soc_penalty) {
  const int k = int(n);
  ProgramCounts c;
  c.variables = (soc_penalty ? 5 : 4) * k;
  c.equalities = k;
  c.inequalities = (soc_penalty ? 4 : 2) * k;
  c.bounds = (soc_penalty ? 8 : 7) * k;
  return c;
}

ProgramCounts EpigraphProgram::counts() const {
  ProgramCounts c;
  c.variables = qp.num_variables();
  c.equalities = int(qp.A.rows());
  c.inequalities = int(qp.G.rows());
  for (int j = 0; j < c.variables; ++j) c.bounds += int(std::isfinite(qp.lb[j])) + int(std::isfinite(qp.ub[j]));
  return c;
}

double EpigraphProgram::unscale(double f) const { return spec.cost == CostKind::Linear ? scale * f : scale * scale * f; }

EpigraphProgram build(const ProblemSpec& spec, const Options& opt) {
  spec.validate();
  EpigraphProgram prog;
  prog.spec = spec;
  prog.soc = spec.soc_penalty.has_value();
  const double E = prog.scale = energy_scale(spec);
  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  const bool linear = spec.cost == CostKind::Linear;
  const double lambda_s = prog.soc ? spec.soc_penalty->lambda / E : 0.0;

  qp::Builder B;
  for (std::size_t i = 0; i < spec.horizon(); ++i) {
    int c = B.add_variable(0.0, bat.s_max(h) / E, opt.throughput_weight);
    int d = B.add_variable(0.0, -bat.s_min(h) / E, opt.throughput_weight);
    int b = B.add_variable(bat.b_min / E, bat.b_max / E);
    int theta = B.add_variable(0.0, qp::kInf, linear ? 1.0 : 0.0);
    int beta = -1;
    if (prog.soc) beta = B.add_variable(0.0, qp::kInf, linear ? lambda_s : 0.0);

    if (i == 0)
      B.add_equality({{b, 1.0}, {c, -bat.eta_ch}, {d, 1.0 / bat.eta_dis}}, spec.b0 / E);
    else
      B.add_equality({{b, 1.0}, {prog.b(i - 1), -1.0}, {c, -bat.eta_ch}, {d, 1.0 / bat.eta_dis}}, 0.0);

    const double delta = spec.delta_energy(i) / E;
    const double band = spec.band_energy(i) / E;
    B.add_inequality({{c, 1.0}, {d, -1.0}, {theta, -1.0}}, band - delta);
    B.add_inequality({{c, -1.0}, {d, 1.0}, {theta, -1.0}}, band + delta);

    if (prog.soc) {
      const auto& sb = spec.soc_penalty->band;
      const double k = E / bat.b_rated;
      B.add_inequality({{b, k}, {beta, -1.0}}, sb.upper());
      B.add_inequality({{b, -k}, {beta, -1.0}}, -sb.lower());
    }

    if (!linear) {
      if (prog.soc)
        B.add_square({{theta, 1.0}, {beta, lambda_s}});
      else
        B.add_square({{theta, 1.0}});
    }
  }
  prog.qp = B.build();
  return prog;
}

std::size_t count_simultaneous(const std::vector<double>& charge, const std::vector<double>& discharge, double tol) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < charge.size(); ++i)
    if (std::min(charge[i], discharge[i]) > tol) ++k;
  return k;
}

DispatchResult solve(const EpigraphProgram& prog, const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  qp::Settings settings;
  settings.tolerance = opt.tolerance;
  settings.max_iterations = opt.max_iterations;
  auto sol = qp::solve(prog.qp, settings);
  if (!qp::usable(sol.status))
    throw NonConvergence("convex solver stopped without converging (" + qp::to_string(sol.status) + ")",
                         sol.primal_residual, sol.dual_residual, sol.gap);

  const auto& spec = prog.spec;
  const auto& bat = spec.battery;
  const double E = prog.scale;
  const double h = spec.series.step_h;
  const std::size_t n = spec.horizon();

  std::vector<double> c(n), d(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::clamp(sol.x[prog.c(i)] * E, 0.0, bat.s_max(h));
    d[i] = std::clamp(sol.x[prog.d(i)] * E, 0.0, -bat.s_min(h));
  }

  // Rebuild b from (c, d) so the dynamics hold exactly, nudging c/d where
  // solver round-off would leave the energy window.
  double cur = spec.b0;
  for (std::size_t i = 0; i < n; ++i) {
    double nb = cur + c[i] * bat.eta_ch - d[i] / bat.eta_dis;
    if (nb > bat.b_max) {
      double dc = std::min(c[i], (nb - bat.b_max) / bat.eta_ch);
      c[i] -= dc;
      nb -= dc * bat.eta_ch;
      if (nb > bat.b_max) {
        d[i] += (nb - bat.b_max) * bat.eta_dis;
        nb = bat.b_max;
      }
    } else if (nb < bat.b_min) {
      double dd = std::min(d[i], (bat.b_min - nb) * bat.eta_dis);
      d[i] -= dd;
      nb += dd / bat.eta_dis;
      if (nb < bat.b_min) {
        c[i] += (bat.b_min - nb) / bat.eta_ch;
        nb = bat.b_min;
      }
    }
    b[i] = cur = nb;
  }

  // Strip simultaneous charge/discharge. Net s is unchanged, later energies rise
  // by w·(1/η_dis − η_ch); only the SoC penalty can make that worse.
  const double rise = 1.0 / bat.eta_dis - bat.eta_ch;
  std::vector<double> suffix_max(n);
  for (std::size_t k = n; k-- > 0;) suffix_max[k] = k + 1 < n ? std::max(b[k], suffix_max[k + 1]) : b[k];
  double shifted = 0.0;
  auto net = [&] {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = c[i] - d[i];
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double w = std::min(c[i], d[i]);
    if (w <= 0.0) continue;
    if (rise > 0.0) w = std::min(w, std::max(bat.b_max - (suffix_max[i] + shifted), 0.0) / rise);
    if (w <= 0.0) continue;
    if (prog.soc) {
      double before = true_objective(spec, net(), b);
      std::vector<double> trial = b;
      for (std::size_t j = i; j < n; ++j) trial[j] += w * rise;
      if (true_objective(spec, net(), trial) > before + 1e-12 * std::max(1.0, std::abs(before))) continue;
      b = std::move(trial);
    } else {
      for (std::size_t j = i; j < n; ++j) b[j] += w * rise;
    }
    c[i] -= w;
    d[i] -= w;
    shifted += w * rise;
  }

  // On flat optima the interior point leaves actions of order μ/throughput_weight.
  // Drop the ones at solver-noise level when that keeps b in the window and the
  // cost does not rise.
  double f = true_objective(spec, net(), b);
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] + d[i] == 0.0 || c[i] + d[i] > 1e-6 * E) continue;
    const double shift = -(c[i] * bat.eta_ch - d[i] / bat.eta_dis);
    std::vector<double> trial = b;
    bool inside = true;
    for (std::size_t j = i; j < n && inside; ++j) {
      trial[j] += shift;
      inside = trial[j] >= bat.b_min && trial[j] <= bat.b_max;
    }
    if (!inside) continue;
    const double saved_c = c[i], saved_d = d[i];
    c[i] = d[i] = 0.0;
    const double g = true_objective(spec, net(), trial);
    if (g <= f + 1e-12 * std::max(1.0, std::abs(f))) {
      b = std::move(trial);
      f = g;
    } else {
      c[i] = saved_c;
      d[i] = saved_d;
    }
  }

  auto result = evaluate_dispatch(spec, net(), b);
  result.complementarity_violations = count_simultaneous(c, d, opt.complementarity_tol * E);
  result.charge = std::move(c);
  result.discharge = std::move(d);
  result.stats.method = "convex";
  result.stats.iterations = sol.iterations;
  result.stats.primal_residual = sol.primal_residual;
  result.stats.dual_residual = sol.dual_residual;
  result.stats.gap = sol.gap;
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gridres::convex
