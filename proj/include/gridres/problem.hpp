#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gridres/battery.hpp"
#include "gridres/metrics.hpp"
#include "gridres/response.hpp"
#include "gridres/timeseries.hpp"

namespace gridres {

/// Preferred state-of-charge window [soc_l, soc_u] with midpoint soc_bar and half-width gamma.
class SocBand {
 public:
  SocBand() = default;
  SocBand(double soc_l, double soc_u);

  /// Parses "L:U", e.g. "0.4:0.8".
  static SocBand parse(std::string_view text);

  double lower() const noexcept { return soc_l_; }
  double upper() const noexcept { return soc_u_; }
  double mid() const noexcept { return 0.5 * (soc_l_ + soc_u_); }
  double gamma() const noexcept { return mid() - soc_l_; }

 private:
  double soc_l_ = 0.0;
  double soc_u_ = 1.0;
};

enum class CostKind { Linear, Quadratic };

/// The six horizon formulations: plain or ε-thresholded cost, optionally with a SoC penalty.
enum class Variant { Linear, LinearResponse, Quadratic, QuadraticResponse, LinearResponseSoc, QuadraticResponseSoc };

inline constexpr std::array<Variant, 6> kAllVariants = {Variant::Linear,           Variant::LinearResponse,
                                                        Variant::Quadratic,        Variant::QuadraticResponse,
                                                        Variant::LinearResponseSoc, Variant::QuadraticResponseSoc};

std::string_view to_string(Variant v);
std::string_view to_string(CostKind c);
CostKind parse_cost(std::string_view text);

struct SocPenalty {
  double lambda = 1.0;
  SocBand band;
};

/// One deterministic horizon problem.
struct ProblemSpec {
  CostKind cost = CostKind::Linear;
  /// Without response awareness ε is treated as 0 in the cost.
  bool response_aware = true;
  std::optional<SocPenalty> soc_penalty;
  ImbalanceSeries series;
  BatterySpec battery;
  ResponseModel response = ResponseModel::with_epsilon(0.0);
  double b0 = 0.0;

  std::size_t horizon() const noexcept { return series.size(); }
  double epsilon() const;
  Variant variant() const;
  /// Throws InputError for invalid combinations and Infeasible when b0 is outside [b_min, b_max].
  void validate() const;

  double delta_energy(std::size_t i) const { return series.delta[i] * series.step_h; }
  double band_energy(std::size_t i) const { return epsilon() * series.p_g[i] * series.step_h; }
};

ProblemSpec make_problem(Variant v, ImbalanceSeries series, BatterySpec battery, double epsilon, double b0,
                         double lambda = 1.0, SocBand band = SocBand(0.4, 0.8));

/// Objective of the problem evaluated directly on a trajectory (s_i per-step energy, b_i energy after step i).
double true_objective(const ProblemSpec& spec, std::span<const double> s, std::span<const double> b);

/// Stored energy after each step, applying the battery dynamics without bound checks.
std::vector<double> simulate(const BatterySpec& battery, double b0, std::span<const double> s);

struct SolverStats {
  std::string method;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double wall_seconds = 0.0;
  // Branch-and-bound only.
  std::size_t nodes = 0;
  std::size_t nodes_pruned = 0;
  std::size_t nodes_infeasible = 0;
  std::size_t max_depth = 0;
  bool certified = true;
  double mip_gap = 0.0;
  std::optional<double> root_bound;

  nlohmann::json to_json(bool include_timing) const;
};

/// Dispatch trajectories and their evaluation. s is per-step energy (MWh), b the
/// stored energy after each step, residual_mw = Δ + s/h.
struct DispatchResult {
  std::vector<double> s;
  std::vector<double> b;
  std::vector<double> soc;
  std::vector<double> residual_mw;
  /// Charge/discharge split when the producer has one (optimizers).
  std::vector<double> charge;
  std::vector<double> discharge;
  double b0 = 0.0;
  double objective = 0.0;
  std::size_t complementarity_violations = 0;
  SolverStats stats;
  std::optional<ReliabilityReport> report;

  nlohmann::json to_json(bool include_timing = true) const;
};

/// Largest violation of the dynamics, energy window and power limits by a
/// dispatch (MWh). Uses the charge/discharge split when the result carries one.
double dynamics_violation(const ProblemSpec& spec, const DispatchResult& r);

/// Fills soc, residuals, objective and report from s and b.
DispatchResult evaluate_dispatch(const ProblemSpec& spec, std::vector<double> s, std::vector<double> b);

}  // namespace gridres
