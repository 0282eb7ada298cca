#include "gridres/opt_mccormick.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "gridres/error.hpp"

namespace gridres::mip {

namespace {

constexpr double kInfCost = std::numeric_limits<double>::infinity();

double energy_scale(const ProblemSpec& spec) {
  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  double e = std::max({bat.s_max(h), -bat.s_min(h), std::abs(bat.b_max), std::abs(bat.b_min), std::abs(spec.b0)});
  for (std::size_t i = 0; i < spec.horizon(); ++i) e = std::max({e, std::abs(spec.delta_energy(i)), spec.band_energy(i)});
  return e > 0.0 ? e : 1.0;
}

struct Point {
  double c, d;
};

// Keeps the part of a convex polygon (or segment) where a·c + b·d ≤ rhs.
std::vector<Point> clip(const std::vector<Point>& poly, double a, double b, double rhs) {
  std::vector<Point> out;
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Point& p = poly[k];
    const Point& q = poly[(k + 1) % m];
    double fp = a * p.c + b * p.d - rhs;
    double fq = a * q.c + b * q.d - rhs;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      double t = fp / (fp - fq);
      out.push_back({p.c + t * (q.c - p.c), p.d + t * (q.d - p.d)});
    }
  }
  return out;
}

}  // namespace

int MipProgram::var_of(std::size_t k) const {
  std::size_t i = k / std::size_t(binaries_per_step());
  switch (BinaryKind(k % std::size_t(binaries_per_step()))) {
    case BinaryKind::U: return u(i);
    case BinaryKind::Z: return z(i);
    case BinaryKind::Z2: return z2(i);
  }
  return -1;
}

double MipProgram::unscale(double f) const { return spec.cost == CostKind::Linear ? scale * f : scale * scale * f; }

MipProgram build_mip(const ProblemSpec& spec, const Options& opt) {
  spec.validate();
  if (spec.horizon() > opt.max_horizon)
    throw HorizonTooLong("horizon " + std::to_string(spec.horizon()) + " exceeds the exact-solve cap of " +
                         std::to_string(opt.max_horizon) + " steps; use the convex method for long horizons");
  MipProgram prog;
  prog.spec = spec;
  prog.scale = energy_scale(spec);
  prog.soc = spec.soc_penalty.has_value();
  prog.tightened = opt.tighten;
  prog.root.assign(prog.num_binaries(), -1);

  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  for (std::size_t i = 0; i < spec.horizon(); ++i) {
    double lo = spec.delta_energy(i) + bat.s_min(h);
    double hi = spec.delta_energy(i) + bat.s_max(h);
    if (lo >= 0.0)
      prog.root[prog.binary(i, BinaryKind::Z)] = 1;
    else if (hi <= 0.0)
      prog.root[prog.binary(i, BinaryKind::Z)] = 0;
    if (prog.soc) {
      double mid = spec.soc_penalty->band.mid();
      if (bat.b_min / bat.b_rated >= mid)
        prog.root[prog.binary(i, BinaryKind::Z2)] = 1;
      else if (bat.b_max / bat.b_rated <= mid)
        prog.root[prog.binary(i, BinaryKind::Z2)] = 0;
    }
  }
  return prog;
}

bool MipProgram::relaxation_feasible(const Fixing& fix) const {
  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  const double C = bat.s_max(h), D = -bat.s_min(h);
  const double tol = 1e-12 * scale;
  double lo = spec.b0, hi = spec.b0;
  for (std::size_t i = 0; i < horizon(); ++i) {
    std::vector<Point> poly;
    switch (fix[binary(i, BinaryKind::U)]) {
      case 1: poly = {{0.0, 0.0}, {C, 0.0}}; break;
      case 0: poly = {{0.0, 0.0}, {0.0, D}}; break;
      default: poly = {{0.0, 0.0}, {C, 0.0}, {0.0, D}}; break;
    }
    // Sign of r = Δh + c − d.
    const double delta = spec.delta_energy(i);
    switch (fix[binary(i, BinaryKind::Z)]) {
      case 1: poly = clip(poly, -1.0, 1.0, delta + tol); break;
      case 0: poly = clip(poly, 1.0, -1.0, -delta + tol); break;
      default: break;
    }
    if (poly.empty()) return false;
    double gain_lo = kInfCost, gain_hi = -kInfCost;
    for (const auto& p : poly) {
      double g = p.c * bat.eta_ch - p.d / bat.eta_dis;
      gain_lo = std::min(gain_lo, g);
      gain_hi = std::max(gain_hi, g);
    }
    lo = std::max(lo + gain_lo, bat.b_min);
    hi = std::min(hi + gain_hi, bat.b_max);
    if (soc) {
      double mid = spec.soc_penalty->band.mid() * bat.b_rated;
      switch (fix[binary(i, BinaryKind::Z2)]) {
        case 1: lo = std::max(lo, mid); break;
        case 0: hi = std::min(hi, mid); break;
        default: break;
      }
    }
    if (lo > hi + tol) return false;
    hi = std::max(hi, lo);
  }
  return true;
}

qp::Problem MipProgram::relaxation(const Fixing& fix) const {
  const auto& bat = spec.battery;
  const double E = scale;
  const double h = spec.series.step_h;
  const double C = bat.s_max(h) / E, D = -bat.s_min(h) / E;
  const bool linear = spec.cost == CostKind::Linear;
  const double k = E / bat.b_rated;
  const double lambda_s = soc ? spec.soc_penalty->lambda / E : 0.0;

  qp::Builder B;
  for (std::size_t i = 0; i < horizon(); ++i) {
    const int fu = fix[binary(i, BinaryKind::U)];
    const int fz = fix[binary(i, BinaryKind::Z)];
    const int fz2 = soc ? fix[binary(i, BinaryKind::Z2)] : -1;
    const double delta = spec.delta_energy(i) / E;
    const double band = spec.band_energy(i) / E;
    const double L = delta - D, U = delta + C;

    double b_lo = bat.b_min / E, b_hi = bat.b_max / E;
    if (soc) {
      double mid = spec.soc_penalty->band.mid() * bat.b_rated / E;
      if (fz2 == 1) b_lo = std::max(b_lo, mid);
      if (fz2 == 0) b_hi = std::min(b_hi, mid);
      b_hi = std::max(b_hi, b_lo);
    }

    int c = B.add_variable(0.0, fu == 0 ? 0.0 : C);
    int d = B.add_variable(0.0, fu == 1 ? 0.0 : D);
    int u = fu < 0 ? B.add_variable(0.0, 1.0) : B.add_variable(fu, fu);
    int b = B.add_variable(b_lo, b_hi);
    int theta = B.add_variable(0.0, qp::kInf, linear ? 1.0 : 0.0);
    int z = fz < 0 ? B.add_variable(0.0, 1.0) : B.add_variable(fz, fz);
    int y = fz == 0 ? B.add_variable(0.0, 0.0) : B.add_variable(-qp::kInf, qp::kInf);

    if (i == 0)
      B.add_equality({{b, 1.0}, {c, -bat.eta_ch}, {d, 1.0 / bat.eta_dis}}, spec.b0 / E);
    else
      B.add_equality({{b, 1.0}, {this->b(i - 1), -1.0}, {c, -bat.eta_ch}, {d, 1.0 / bat.eta_dis}}, 0.0);

    if (fu < 0) {
      B.add_inequality({{c, 1.0}, {u, -C}}, 0.0);
      B.add_inequality({{d, 1.0}, {u, D}}, D);
    }

    // θ ≥ 2y − r − εP_g h
    B.add_inequality({{y, 2.0}, {c, -1.0}, {d, 1.0}, {theta, -1.0}}, band + delta);
    if (tightened) {
      B.add_inequality({{c, 1.0}, {d, -1.0}, {theta, -1.0}}, band - delta);
      B.add_inequality({{c, -1.0}, {d, 1.0}, {theta, -1.0}}, band + delta);
    }
    if (fz < 0) {
      B.add_inequality({{z, L}, {y, -1.0}}, 0.0);
      B.add_inequality({{c, 1.0}, {d, -1.0}, {z, U}, {y, -1.0}}, U - delta);
      B.add_inequality({{y, 1.0}, {z, -U}}, 0.0);
      B.add_inequality({{y, 1.0}, {c, -1.0}, {d, 1.0}, {z, -L}}, delta - L);
      B.add_inequality({{y, -2.0}, {c, 1.0}, {d, -1.0}}, -delta);
    } else if (fz == 1) {
      B.add_equality({{y, 1.0}, {c, -1.0}, {d, 1.0}}, delta);
      B.add_inequality({{c, -1.0}, {d, 1.0}}, delta);
    } else {
      B.add_inequality({{c, 1.0}, {d, -1.0}}, -delta);
    }

    int beta = -1;
    if (soc) {
      const auto& sb = spec.soc_penalty->band;
      const double mid = sb.mid(), gamma = sb.gamma();
      const double smin = bat.b_min / bat.b_rated, smax = bat.b_max / bat.b_rated;
      beta = B.add_variable(0.0, qp::kInf, linear ? 1.0 : 0.0);
      int z2 = fz2 < 0 ? B.add_variable(0.0, 1.0) : B.add_variable(fz2, fz2);
      int y2 = fz2 == 0 ? B.add_variable(0.0, 0.0) : B.add_variable(-qp::kInf, qp::kInf);

      // β ≥ λ(2y2 − 2z2·SoC̄ − SoC + SoC̄ − γ)
      B.add_inequality({{y2, 2.0 * lambda_s}, {z2, -2.0 * mid * lambda_s}, {b, -k * lambda_s}, {beta, -1.0}},
                       lambda_s * (gamma - mid));
      if (tightened) {
        B.add_inequality({{b, k * lambda_s}, {beta, -1.0}}, lambda_s * sb.upper());
        B.add_inequality({{b, -k * lambda_s}, {beta, -1.0}}, -lambda_s * sb.lower());
      }
      if (fz2 < 0) {
        B.add_inequality({{z2, smin}, {y2, -1.0}}, 0.0);
        B.add_inequality({{b, k}, {z2, smax}, {y2, -1.0}}, smax);
        B.add_inequality({{y2, 1.0}, {z2, -smax}}, 0.0);
        B.add_inequality({{y2, 1.0}, {b, -k}, {z2, -smin}}, -smin);
        B.add_inequality({{y2, -2.0}, {z2, 2.0 * mid}, {b, k}}, mid);
      } else if (fz2 == 1) {
        B.add_equality({{y2, 1.0}, {b, -k}}, 0.0);
      }
    }

    if (!linear) {
      if (soc)
        B.add_square({{theta, 1.0}, {beta, 1.0}});
      else
        B.add_square({{theta, 1.0}});
    }
  }
  return B.build();
}

MipResult branch_and_bound(const MipProgram& prog, const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  const auto& spec = prog.spec;
  const auto& bat = spec.battery;
  const double E = prog.scale;
  const double h = spec.series.step_h;
  const std::size_t n = prog.horizon();
  const double unit = prog.unscale(1.0);
  const double thr = 1e-7;  // scaled units
  const double lambda_s = prog.soc ? spec.soc_penalty->lambda / E : 0.0;

  auto tol = [&](double inc) { return std::max(opt.gap_tol * std::abs(inc), 1e-12 * unit); };

  struct Node {
    Fixing fix;
    std::size_t depth;
    double bound;
  };
  std::vector<Node> stack;
  stack.push_back({prog.root, 0, -kInfCost});

  SolverStats stats;
  stats.method = "mip";
  double incumbent = kInfCost;
  std::vector<double> best_s;
  double closed_lb = kInfCost;
  bool budget_hit = false;

  qp::Settings qs;
  qs.tolerance = opt.qp_tolerance;

  while (!stack.empty()) {
    if (stats.nodes >= opt.max_nodes) {
      budget_hit = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++stats.nodes;
    stats.max_depth = std::max(stats.max_depth, node.depth);

    if (node.bound >= incumbent - tol(incumbent)) {
      ++stats.nodes_pruned;
      closed_lb = std::min(closed_lb, node.bound);
      continue;
    }
    if (!prog.relaxation_feasible(node.fix)) {
      ++stats.nodes_infeasible;
      continue;
    }

    auto sol = qp::solve(prog.relaxation(node.fix), qs);
    stats.iterations += sol.iterations;
    const bool solved = qp::usable(sol.status);
    double lb = node.bound;
    if (solved) {
      lb = std::max(lb, prog.unscale(sol.objective));
      if (node.depth == 0) {
        stats.root_bound = lb;
        stats.primal_residual = sol.primal_residual;
        stats.dual_residual = sol.dual_residual;
        stats.gap = sol.gap;
      }

      // Rounding heuristic: project the relaxed net dispatch onto the exact feasible set.
      std::vector<double> s(n), b(n);
      double cur = spec.b0;
      for (std::size_t i = 0; i < n; ++i) {
        auto r = feasible_range(bat, cur, h);
        s[i] = std::clamp((sol.x[prog.c(i)] - sol.x[prog.d(i)]) * E, r.lo, r.hi);
        b[i] = cur = step(bat, cur, s[i]);
      }
      double cost = true_objective(spec, s, b);
      if (cost < incumbent) {
        incumbent = cost;
        best_s = std::move(s);
      }
    } else {
      stats.certified = false;
    }

    if (lb >= incumbent - tol(incumbent)) {
      ++stats.nodes_pruned;
      closed_lb = std::min(closed_lb, lb);
      continue;
    }

    // Branch on a binary whose relaxed value lets the relaxation undercut the true cost.
    std::size_t pick = prog.num_binaries();
    double best_frac = -1.0;
    if (solved) {
      const auto& x = sol.x;
      for (std::size_t k = 0; k < prog.num_binaries(); ++k) {
        if (node.fix[k] >= 0) continue;
        std::size_t i = k / std::size_t(prog.binaries_per_step());
        bool violated = false;
        switch (BinaryKind(k % std::size_t(prog.binaries_per_step()))) {
          case BinaryKind::U: violated = std::min(x[prog.c(i)], x[prog.d(i)]) > thr; break;
          case BinaryKind::Z: {
            double r = (spec.delta_energy(i)) / E + x[prog.c(i)] - x[prog.d(i)];
            double hinge = std::max(std::abs(r) - spec.band_energy(i) / E, 0.0);
            violated = x[prog.theta(i)] < hinge - thr;
            break;
          }
          case BinaryKind::Z2: {
            const auto& sb = spec.soc_penalty->band;
            double soc = x[prog.b(i)] * E / bat.b_rated;
            double hinge = lambda_s * std::max(std::abs(soc - sb.mid()) - sb.gamma(), 0.0);
            violated = x[prog.beta(i)] < hinge - thr;
            break;
          }
        }
        if (!violated) continue;
        double v = x[prog.var_of(k)];
        double frac = std::min(v, 1.0 - v);
        if (frac > best_frac) {
          best_frac = frac;
          pick = k;
        }
      }
    }
    if (pick == prog.num_binaries()) {
      // Nothing violated: the relaxed point is exact up to round-off. Fall back to
      // any free binary only if the incumbent still sits above the bound.
      for (std::size_t k = 0; k < prog.num_binaries() && solved; ++k) {
        if (node.fix[k] >= 0) continue;
        double v = sol.x[prog.var_of(k)];
        double frac = std::min(v, 1.0 - v);
        if (frac > best_frac) {
          best_frac = frac;
          pick = k;
        }
      }
      if (solved && incumbent - lb <= tol(incumbent)) pick = prog.num_binaries();
      if (!solved)
        for (std::size_t k = 0; k < prog.num_binaries(); ++k)
          if (node.fix[k] < 0) {
            pick = k;
            break;
          }
    }
    if (pick == prog.num_binaries()) {
      closed_lb = std::min(closed_lb, lb);
      continue;
    }

    double v = solved ? sol.x[prog.var_of(pick)] : 0.0;
    std::array<std::int8_t, 2> order = v >= 0.5 ? std::array<std::int8_t, 2>{1, 0} : std::array<std::int8_t, 2>{0, 1};
    // Push the preferred child last so it is explored first.
    for (int j = 1; j >= 0; --j) {
      Node child{node.fix, node.depth + 1, lb};
      child.fix[pick] = order[std::size_t(j)];
      stack.push_back(std::move(child));
    }
  }

  if (best_s.empty()) {
    // The relaxation at the root is always feasible (s = 0 is), so this only
    // happens when every relaxation failed numerically.
    throw NonConvergence("branch and bound found no incumbent", stats.primal_residual, stats.dual_residual, stats.gap);
  }

  double global_lb = std::min(closed_lb, incumbent);
  if (budget_hit) {
    stats.certified = false;
    for (const auto& nd : stack) global_lb = std::min(global_lb, nd.bound);
  }
  stats.mip_gap = std::max(0.0, incumbent - global_lb) / std::max(std::abs(incumbent), unit);

  std::vector<double> b = simulate(bat, spec.b0, best_s);
  MipResult out;
  out.binaries.assign(prog.num_binaries(), 0);
  std::vector<double> charge(n), discharge(n);
  for (std::size_t i = 0; i < n; ++i) {
    charge[i] = std::max(best_s[i], 0.0);
    discharge[i] = std::max(-best_s[i], 0.0);
    out.binaries[prog.binary(i, BinaryKind::U)] = best_s[i] > 0.0 ? 1 : 0;
    out.binaries[prog.binary(i, BinaryKind::Z)] = spec.delta_energy(i) + best_s[i] >= 0.0 ? 1 : 0;
    if (prog.soc)
      out.binaries[prog.binary(i, BinaryKind::Z2)] = b[i] / bat.b_rated >= spec.soc_penalty->band.mid() ? 1 : 0;
  }
  out.dispatch = evaluate_dispatch(spec, std::move(best_s), std::move(b));
  out.dispatch.charge = std::move(charge);
  out.dispatch.discharge = std::move(discharge);
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.dispatch.stats = stats;
  return out;
}

}  // namespace gridres::mip
