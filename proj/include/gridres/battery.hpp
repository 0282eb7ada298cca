#pragma once

#include <span>

#include <json.hpp>

namespace gridres {

/// Physical battery limits. Energies in MWh, powers in MW.
///
/// delta_max is the largest charging power (> 0) and delta_min the largest
/// discharging power (< 0); per-step energy limits are delta·h.
struct BatterySpec {
  double b_min = 0.0;
  double b_max = 0.0;
  double b_rated = 0.0;
  double delta_max = 0.0;
  double delta_min = 0.0;
  double eta_ch = 1.0;
  double eta_dis = 1.0;

  void validate() const;

  double s_max(double h) const { return delta_max * h; }
  double s_min(double h) const { return delta_min * h; }

  /// xC-yC battery: charges fully in 1/x hours and discharges fully in 1/y hours.
  static BatterySpec from_c_rating(double energy_mwh, double c_charge, double c_discharge, double eta_ch = 1.0,
                                   double eta_dis = 1.0);

  /// Hard energy window restricted to [soc_lo, soc_hi]·b_rated.
  BatterySpec narrowed(double soc_lo, double soc_hi) const;
};

/// Battery description as it appears in scenario and CLI JSON.
struct BatteryConfig {
  double energy_mwh = 0.0;
  double c_charge = 1.0;
  double c_discharge = 1.0;
  double eta_ch = 1.0;
  double eta_dis = 1.0;
  /// Initial state of charge.
  double soc0 = 0.5;

  BatterySpec spec() const { return BatterySpec::from_c_rating(energy_mwh, c_charge, c_discharge, eta_ch, eta_dis); }
  double b0() const { return soc0 * energy_mwh; }

  static BatteryConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct BatteryState {
  double b = 0.0;
  double soc = 0.0;
};

struct EnergyRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Energy after applying grid-side energy s (MWh, signed) for one step:
/// b = b_prev + max(s,0)·η_ch − max(−s,0)/η_dis. Throws BoundViolation when the
/// result leaves [b_min, b_max] by more than rounding.
double step(const BatterySpec& spec, double b_prev, double s);

/// Same update without bound checks.
double apply(const BatterySpec& spec, double b_prev, double s) noexcept;

/// Grid-side energy that moves the stored energy from b_prev to b_next (inverse of apply).
double energy_for(const BatterySpec& spec, double b_prev, double b_next) noexcept;

/// Per-step energy bounds that keep both the power limits and [b_min, b_max].
EnergyRange feasible_range(const BatterySpec& spec, double b_prev, double h);

double mean_soc(std::span<const BatteryState> trajectory);
double mean_soc(std::span<const double> soc);

}  // namespace gridres
