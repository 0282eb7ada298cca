#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "gridres/timeseries.hpp"

namespace gridres {

/// Frequency-response parameters from which ε can be derived.
///
/// mhc_per_pg is the lumped inertia × ramp-rate product M_H·C divided by the
/// scheduled generation, in MW/Hz per MW.
struct PhysicalResponse {
  double f0 = 50.0;
  double f_db = 0.0;
  /// Allowed excursion f0 − f_min, Hz.
  double delta_f_allow = 0.0;
  double mhc_per_pg = 0.0;
};

/// Tolerable imbalance band ±ε·P_g. ε may be given directly or derived from the
/// physical parameters; a direct ε takes precedence.
struct ResponseModel {
  std::optional<double> epsilon;
  std::optional<PhysicalResponse> physical;

  static ResponseModel with_epsilon(double eps);

  /// ε, either as configured or 2·mhc_per_pg·(delta_f_allow − f_db).
  double resolved_epsilon() const;

  /// Accepts {"epsilon": e} or {"f0", "f_db", "delta_f_allow", "mhc_per_pg"}.
  static ResponseModel from_json(const nlohmann::json& j);
};

/// Frequency nadir f0 − f_db − r/(2·mhc) reached after an imbalance r (MW) given
/// the lumped M_H·C in MW/Hz.
double nadir(double mhc, double r, double f0, double f_db);

/// ε·p_g, the largest imbalance (MW) the grid absorbs without storage.
double max_safe_imbalance(const ResponseModel& model, double p_g);

struct ImbalanceBand {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Per-sample permissible residual band (−ε·P_g(i), +ε·P_g(i)) in MW.
ImbalanceBand band(const ResponseModel& model, const ImbalanceSeries& series);

}  // namespace gridres
