#include "gridres/myopic.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <string>

#include "gridres/error.hpp"

namespace gridres::myopic {

double alg1_step(const BatterySpec& spec, double b_prev, double delta, double h) {
  auto r = feasible_range(spec, b_prev, h);
  if (delta > 0.0) return std::max(-delta, r.lo);
  return std::min(-delta, r.hi);
}

double alg2_step(const BatterySpec& spec, double b_prev, double delta, double eps_pg, double h) {
  if (eps_pg < 0.0) throw InputError("alg2_step: band half-width must be non-negative");
  auto r = feasible_range(spec, b_prev, h);
  if (delta > eps_pg) return std::max(-delta + eps_pg, r.lo);
  if (delta < -eps_pg) return std::min(-delta - eps_pg, r.hi);
  // Inside the band, edges included.
  return 0.0;
}

double alg3_step(const BatterySpec& spec, const SocBand& band, double b_prev, double delta, double eps_pg, double h) {
  if (eps_pg < 0.0) throw InputError("alg3_step: band half-width must be non-negative");
  auto r = feasible_range(spec, b_prev, h);
  const double rated = spec.b_rated;
  const double soc = b_prev / rated;

  int flag_soc = soc <= band.lower() ? 1 : (soc <= band.upper() ? 2 : 3);
  int flag_delta = delta <= -eps_pg ? 1 : (delta <= eps_pg ? 2 : 3);

  // Energy needed to reach a SoC level, grid side. Gaps at rounding level count as reached.
  auto gap = [&](double level) {
    const double g = level * rated - b_prev;
    return std::abs(g) <= 1e-12 * rated ? 0.0 : g;
  };
  auto charge_to = [&](double level) { return gap(level) / spec.eta_ch; };
  auto discharge_to = [&](double level) { return gap(level) * spec.eta_dis; };

  auto charge_to_band = [&] { return std::max(std::min({r.hi, charge_to(band.upper()), -delta - eps_pg}), 0.0); };
  auto replenish_up = [&] { return std::max(std::min({r.hi, charge_to(band.mid()), -delta + eps_pg}), 0.0); };
  auto replenish_down = [&] { return std::min(std::max({r.lo, discharge_to(band.mid()), -delta - eps_pg}), 0.0); };
  auto discharge_to_band = [&] { return std::min(std::max({r.lo, discharge_to(band.lower()), -delta + eps_pg}), 0.0); };

  double s = 0.0;
  switch (flag_soc * 10 + flag_delta) {
    case 11: s = charge_to_band(); break;
    case 12: s = replenish_up(); break;
    case 13: s = 0.0; break;
    case 21: s = charge_to_band(); break;
    case 22: s = soc <= band.mid() ? replenish_up() : replenish_down(); break;
    case 23: s = discharge_to_band(); break;
    case 31: s = 0.0; break;
    case 32: s = replenish_down(); break;
    case 33: s = discharge_to_band(); break;
  }
  return std::clamp(s, r.lo, r.hi);
}

Policy parse_policy(std::string_view text) {
  if (text == "alg1") return Policy::Alg1;
  if (text == "alg2") return Policy::Alg2;
  if (text == "alg3") return Policy::Alg3;
  throw InputError("unknown policy '" + std::string(text) + "' (expected alg1, alg2 or alg3)");
}

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::Alg1: return "alg1";
    case Policy::Alg2: return "alg2";
    case Policy::Alg3: return "alg3";
  }
  return "?";
}

DispatchResult run_policy(Policy policy, const BatterySpec& spec, std::optional<SocBand> band,
                          const ImbalanceSeries& series, double epsilon, double b0) {
  auto t0 = std::chrono::steady_clock::now();
  if (policy == Policy::Alg3 && !band) throw InputError("alg3 needs a SoC band");

  ProblemSpec problem;
  problem.series = series;
  problem.battery = spec;
  problem.response = ResponseModel::with_epsilon(epsilon);
  problem.b0 = b0;
  problem.cost = CostKind::Linear;
  problem.response_aware = policy != Policy::Alg1;
  problem.validate();

  const double h = series.step_h;
  std::vector<double> s(series.size()), b(series.size());
  double cur = b0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    double delta = series.delta[i] * h;
    double eps_pg = epsilon * series.p_g[i] * h;
    double si = 0.0;
    switch (policy) {
      case Policy::Alg1: si = alg1_step(spec, cur, delta, h); break;
      case Policy::Alg2: si = alg2_step(spec, cur, delta, eps_pg, h); break;
      case Policy::Alg3: si = alg3_step(spec, *band, cur, delta, eps_pg, h); break;
    }
    cur = step(spec, cur, si);
    s[i] = si;
    b[i] = cur;
  }

  auto result = evaluate_dispatch(problem, std::move(s), std::move(b));
  result.stats.method = std::string(to_string(policy));
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gridres::myopic
