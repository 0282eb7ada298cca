#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridres/battery.hpp"
#include "gridres/metrics.hpp"
#include "gridres/problem.hpp"
#include "gridres/timeseries.hpp"

namespace gridres::scenario {

enum class Method { Alg1, Alg2, Alg3, Convex, Mip };

Method parse_method(std::string_view text);
std::string_view to_string(Method m);

/// Where the imbalance series comes from.
struct DataSource {
  std::optional<std::filesystem::path> file;
  CsvSchema schema;
  std::optional<double> resample_h;
  // Synthetic data when no file is given.
  std::size_t synth_n = 0;
  SynthModel synth_model;
  std::uint64_t seed = 0;

  ImbalanceSeries load() const;
};

/// A storage-size × ε × method sweep. A battery entry without a value means no storage.
///
/// JSON layout:
///   {"data": {"file": "x.csv", "schema": {...}, "resample_h": 0.25}
///         or {"synth": {"n": 8928, "seed": 1, "model": {...}}},
///    "batteries": [null, {"energy_mwh": 100}, ...],
///    "epsilons": [0, 0.01], "methods": ["alg2", "convex"],
///    "cost": "linear", "soc_penalty": false, "soc_band": "0.4:0.8", "lambda": 1,
///    "mip_max_horizon": 24}
struct Scenario {
  std::string name = "scenario";
  DataSource data;
  std::vector<std::optional<BatteryConfig>> batteries;
  std::vector<double> epsilons;
  std::vector<Method> methods;
  CostKind cost = CostKind::Linear;
  /// Adds the SoC hinge to the convex/MIP objective.
  bool soc_penalty = false;
  SocBand soc_band = SocBand(0.4, 0.8);
  double lambda = 1.0;
  std::size_t mip_max_horizon = 24;
  bool parallel = true;

  void validate() const;
  static Scenario from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

struct Cell {
  std::size_t battery_index = 0;
  double energy_mwh = 0.0;  ///< 0 for no storage
  bool has_battery = false;
  double epsilon = 0.0;
  Method method = Method::Alg1;
  bool ok = false;
  std::string error;
  std::optional<DispatchResult> dispatch;
  ReliabilityReport report;

  std::string label() const;
};

struct Marginal {
  Method method = Method::Alg1;
  double epsilon = 0.0;
  double from_mwh = 0.0;
  double to_mwh = 0.0;
  /// Change in RI_ε^mod (percentage points) per added MWh.
  double ri_per_mwh = 0.0;
};

struct SweepResult {
  std::string name;
  std::vector<Cell> cells;  ///< battery-major, then ε, then method
  std::vector<Marginal> marginals;
  std::size_t n = 0;
  double step_h = 0.0;
};

/// Runs every cell; failures are recorded on the cell and never abort the sweep.
SweepResult run_scenario(const Scenario& sc);

/// Finite differences of ri_eps_mod over battery size, per method and ε, among the successful cells.
std::vector<Marginal> marginal_benefit(const std::vector<Cell>& cells);

/// Aligned text table: Optimization, battery, ε, λ_linear, λ_quad, mean SoC, SAIDI_ε^mod, RI_ε^mod.
std::string format_table(const SweepResult& result);

/// Writes cells/*.json, summary.table.txt, summary.json, ri_vs_eps.csv and marginal.csv.
/// Contents depend only on the inputs (no timings).
void emit_report(const SweepResult& result, const std::filesystem::path& out_dir);

}  // namespace gridres::scenario
