#pragma once

#include <optional>
#include <string_view>

#include "gridres/battery.hpp"
#include "gridres/problem.hpp"
#include "gridres/timeseries.hpp"

namespace gridres::myopic {

// Per-step threshold rules. `delta` is the imbalance energy Δ_i·h and `eps_pg`
// the band half-width ε·P_g(i)·h, both in MWh; the return value is the grid-side
// storage energy s* for the step (positive charges).

/// Cancels as much of the imbalance as the feasible range allows.
double alg1_step(const BatterySpec& spec, double b_prev, double delta, double h);

/// Pulls the residual back to the nearest band edge; does nothing inside the band.
double alg2_step(const BatterySpec& spec, double b_prev, double delta, double eps_pg, double h);

/// Band-aware rule with state-of-charge management.
///
/// The SoC is classified as below / inside / above [soc_l, soc_u] and the
/// imbalance as below / inside / above [−eps_pg, +eps_pg]:
///
///   SoC \ Δ   below            inside               above
///   below     charge to band   replenish to mid     nothing
///   inside    charge to band   replenish to mid     discharge to band
///   above     nothing          replenish to mid     discharge to band
///
/// Corrective actions stop at soc_u (charging) or soc_l (discharging); replenishing
/// stops at soc_bar and never pushes the residual out of the band.
double alg3_step(const BatterySpec& spec, const SocBand& band, double b_prev, double delta, double eps_pg, double h);

enum class Policy { Alg1, Alg2, Alg3 };

Policy parse_policy(std::string_view text);
std::string_view to_string(Policy p);

/// Runs a rule over the whole series. The objective reported is the linear imbalance
/// cost the rule targets (ε = 0 for Alg1, ε otherwise).
DispatchResult run_policy(Policy policy, const BatterySpec& spec, std::optional<SocBand> band,
                          const ImbalanceSeries& series, double epsilon, double b0);

}  // namespace gridres::myopic
