#pragma once

// Straightforward re-derivations of the model used to check the library.
// Nothing here calls into the code under test except for plain data types.

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridres/problem.hpp"

namespace gridres::reference {

inline double stored_after(double b_prev, double s, double eta_ch, double eta_dis) {
  if (s >= 0.0) return b_prev + s * eta_ch;
  return b_prev + s / eta_dis;
}

struct Indices {
  double saidi_mod = 0.0;
  double saidi_eps_mod = 0.0;
  double ri_mod = 0.0;
  double ri_eps_mod = 0.0;
  double lambda_linear = 0.0;
  double lambda_quad = 0.0;
};

// Long-double accumulation straight from the definitions.
inline Indices indices(const std::vector<double>& r, const std::vector<double>& pg, double eps) {
  long double abs_sum = 0, hinge = 0, hinge_sq = 0, gen = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    long double a = std::fabs((long double)r[i]);
    long double over = a - (long double)eps * pg[i];
    if (over < 0) over = 0;
    abs_sum += a;
    hinge += over;
    hinge_sq += over * over;
    gen += pg[i];
  }
  const long double n = (long double)r.size();
  const long double pbar = gen / n;
  Indices out;
  out.saidi_mod = double(abs_sum / pbar);
  out.saidi_eps_mod = double(hinge / pbar);
  out.ri_mod = double(100.0L * (1.0L - abs_sum / gen));
  out.ri_eps_mod = double(100.0L * (1.0L - hinge / gen));
  out.lambda_linear = double(100.0L * hinge / pbar);
  out.lambda_quad = double(100.0L * hinge_sq / (pbar * pbar));
  return out;
}

inline double objective(const ProblemSpec& p, const std::vector<double>& s, const std::vector<double>& b) {
  const double h = p.series.step_h;
  const double eps = p.response_aware ? *p.response.epsilon : 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double r = p.series.delta[i] * h + s[i];
    double band = eps * p.series.p_g[i] * h;
    double theta = 0.0;
    if (r > band) theta = r - band;
    if (r < -band) theta = -r - band;
    double beta = 0.0;
    if (p.soc_penalty) {
      double soc = b[i] / p.battery.b_rated;
      double lo = p.soc_penalty->band.lower(), hi = p.soc_penalty->band.upper();
      if (soc > hi) beta = p.soc_penalty->lambda * (soc - hi);
      if (soc < lo) beta = p.soc_penalty->lambda * (lo - soc);
    }
    double t = theta + beta;
    total += p.cost == CostKind::Linear ? t : t * t;
  }
  return total;
}

// Largest violation of power limits, energy window and dynamics. With a
// charge/discharge split the dynamics are checked on (c, d).
inline double infeasibility(const ProblemSpec& p, const DispatchResult& r) {
  const auto& bat = p.battery;
  const double h = p.series.step_h;
  const bool split = r.charge.size() == r.s.size() && !r.charge.empty();
  double worst = 0.0, prev = p.b0;
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    const double s = r.s[i];
    worst = std::max({worst, s - bat.delta_max * h, bat.delta_min * h - s, r.b[i] - bat.b_max, bat.b_min - r.b[i]});
    double next;
    if (split) {
      const double c = r.charge[i], d = r.discharge[i];
      worst = std::max({worst, -c, -d, std::fabs(c - d - s)});
      next = prev + c * bat.eta_ch - d / bat.eta_dis;
    } else {
      next = stored_after(prev, s, bat.eta_ch, bat.eta_dis);
    }
    worst = std::max(worst, std::fabs(next - r.b[i]));
    prev = r.b[i];
  }
  return worst;
}

}  // namespace gridres::reference
