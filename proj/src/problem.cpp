#include "gridres/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "gridres/error.hpp"

namespace gridres {

SocBand::SocBand(double soc_l, double soc_u) : soc_l_(soc_l), soc_u_(soc_u) {
  if (!(soc_l >= 0.0 && soc_l < soc_u && soc_u <= 1.0)) throw InputError("SoC band needs 0 <= lower < upper <= 1");
}

SocBand SocBand::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InputError("SoC band must look like L:U");
  auto num = [](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw InputError("bad SoC band value '" + std::string(s) + "'");
    return v;
  };
  return SocBand(num(text.substr(0, colon)), num(text.substr(colon + 1)));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Linear: return "linear";
    case Variant::LinearResponse: return "linear_response";
    case Variant::Quadratic: return "quadratic";
    case Variant::QuadraticResponse: return "quadratic_response";
    case Variant::LinearResponseSoc: return "linear_response_soc";
    case Variant::QuadraticResponseSoc: return "quadratic_response_soc";
  }
  return "?";
}

std::string_view to_string(CostKind c) { return c == CostKind::Linear ? "linear" : "quadratic"; }

CostKind parse_cost(std::string_view text) {
  if (text == "linear") return CostKind::Linear;
  if (text == "quadratic") return CostKind::Quadratic;
  throw InputError("unknown cost '" + std::string(text) + "'");
}

double ProblemSpec::epsilon() const { return response_aware ? response.resolved_epsilon() : 0.0; }

Variant ProblemSpec::variant() const {
  bool lin = cost == CostKind::Linear;
  if (soc_penalty) return lin ? Variant::LinearResponseSoc : Variant::QuadraticResponseSoc;
  if (response_aware) return lin ? Variant::LinearResponse : Variant::QuadraticResponse;
  return lin ? Variant::Linear : Variant::Quadratic;
}

void ProblemSpec::validate() const {
  series.validate();
  battery.validate();
  response.resolved_epsilon();
  if (soc_penalty) {
    if (!response_aware) throw InputError("SoC penalty is only defined for response-aware costs");
    if (!(soc_penalty->lambda >= 0.0)) throw InputError("SoC penalty weight must be non-negative");
  }
  double slack = 1e-12 * std::max(1.0, battery.b_rated);
  if (b0 < battery.b_min - slack || b0 > battery.b_max + slack)
    throw Infeasible("initial energy b0 lies outside [b_min, b_max]");
}

ProblemSpec make_problem(Variant v, ImbalanceSeries series, BatterySpec battery, double epsilon, double b0, double lambda,
                         SocBand band) {
  ProblemSpec p;
  p.series = std::move(series);
  p.battery = battery;
  p.response = ResponseModel::with_epsilon(epsilon);
  p.b0 = b0;
  p.cost = (v == Variant::Linear || v == Variant::LinearResponse || v == Variant::LinearResponseSoc) ? CostKind::Linear
                                                                                                     : CostKind::Quadratic;
  p.response_aware = !(v == Variant::Linear || v == Variant::Quadratic);
  if (v == Variant::LinearResponseSoc || v == Variant::QuadraticResponseSoc) p.soc_penalty = SocPenalty{lambda, band};
  p.validate();
  return p;
}

double true_objective(const ProblemSpec& spec, std::span<const double> s, std::span<const double> b) {
  const std::size_t n = spec.horizon();
  if (s.size() != n || b.size() != n) throw InputError("trajectory length does not match the horizon");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double theta = std::max(std::abs(spec.delta_energy(i) + s[i]) - spec.band_energy(i), 0.0);
    double beta = 0.0;
    if (spec.soc_penalty) {
      const auto& pen = *spec.soc_penalty;
      double soc = b[i] / spec.battery.b_rated;
      beta = pen.lambda * std::max(std::abs(soc - pen.band.mid()) - pen.band.gamma(), 0.0);
    }
    double term = theta + beta;
    total += spec.cost == CostKind::Linear ? term : term * term;
  }
  return total;
}

std::vector<double> simulate(const BatterySpec& battery, double b0, std::span<const double> s) {
  std::vector<double> b(s.size());
  double cur = b0;
  for (std::size_t i = 0; i < s.size(); ++i) b[i] = cur = apply(battery, cur, s[i]);
  return b;
}

nlohmann::json SolverStats::to_json(bool include_timing) const {
  nlohmann::json j = {{"method", method},
                      {"iterations", iterations},
                      {"primal_residual", primal_residual},
                      {"dual_residual", dual_residual},
                      {"gap", gap}};
  if (nodes > 0) {
    j["nodes"] = nodes;
    j["nodes_pruned"] = nodes_pruned;
    j["nodes_infeasible"] = nodes_infeasible;
    j["max_depth"] = max_depth;
    j["certified"] = certified;
    j["mip_gap"] = mip_gap;
  }
  if (root_bound) j["root_bound"] = *root_bound;
  if (include_timing) j["wall_seconds"] = wall_seconds;
  return j;
}

nlohmann::json DispatchResult::to_json(bool include_timing) const {
  nlohmann::json j = {{"b0", b0},
                      {"objective", objective},
                      {"complementarity_violations", complementarity_violations},
                      {"solver", stats.to_json(include_timing)},
                      {"s", s},
                      {"b", b},
                      {"soc", soc},
                      {"residual_mw", residual_mw}};
  if (report) j["report"] = report->to_json();
  return j;
}

DispatchResult evaluate_dispatch(const ProblemSpec& spec, std::vector<double> s, std::vector<double> b) {
  DispatchResult r;
  r.b0 = spec.b0;
  r.s = std::move(s);
  r.b = std::move(b);
  r.soc.resize(r.b.size());
  for (std::size_t i = 0; i < r.b.size(); ++i) r.soc[i] = r.b[i] / spec.battery.b_rated;
  std::vector<double> power(r.s.size());
  for (std::size_t i = 0; i < r.s.size(); ++i) power[i] = r.s[i] / spec.series.step_h;
  r.residual_mw = residuals(spec.series, power);
  r.objective = true_objective(spec, r.s, r.b);
  r.report = report(spec.series, r.residual_mw, std::span<const double>(r.soc), spec.response.resolved_epsilon());
  return r;
}

double dynamics_violation(const ProblemSpec& spec, const DispatchResult& r) {
  const auto& bat = spec.battery;
  const double h = spec.series.step_h;
  const std::size_t n = spec.horizon();
  if (r.s.size() != n || r.b.size() != n) throw InputError("trajectory length does not match the horizon");
  const bool split = r.charge.size() == n && r.discharge.size() == n;
  double worst = 0.0;
  double prev = spec.b0;
  for (std::size_t i = 0; i < n; ++i) {
    double next;
    if (split) {
      const double c = r.charge[i], d = r.discharge[i];
      worst = std::max({worst, -c, -d, c - bat.s_max(h), d + bat.s_min(h), std::abs(c - d - r.s[i])});
      next = prev + c * bat.eta_ch - d / bat.eta_dis;
    } else {
      next = apply(bat, prev, r.s[i]);
    }
    worst = std::max({worst, std::abs(next - r.b[i]), r.s[i] - bat.s_max(h), bat.s_min(h) - r.s[i],
                      r.b[i] - bat.b_max, bat.b_min - r.b[i]});
    prev = r.b[i];
  }
  return worst;
}

}  // namespace gridres
