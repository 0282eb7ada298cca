#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "gridres/timeseries.hpp"

namespace gridres {

/// One outage incident for the classical customer-based SAIDI.
struct Interruption {
  double duration = 0.0;
  double customers = 0.0;
};

/// Σ U_i·N_i / C_T in the duration unit of the inputs.
double saidi_classic(std::span<const Interruption> interruptions, double total_customers);

/// 100·(1 − saidi/horizon), in percent. Both arguments share one time unit.
double ri_from_saidi(double saidi, double horizon);

/// R(i) = Δ_i + s_i with s given as power (MW).
std::vector<double> residuals(const ImbalanceSeries& series, std::span<const double> dispatch_mw);

/// Reliability indices of a residual trajectory.
///
/// SAIDI values are in sample-equivalents (multiply by step_h·60 for minutes),
/// RI in percent, lambda_linear in percent·samples and lambda_quad in
/// percent²·samples (both normalised by the mean generation).
struct ReliabilityReport {
  double epsilon = 0.0;
  double saidi_mod = 0.0;
  double saidi_eps_mod = 0.0;
  double ri_mod = 100.0;
  double ri_eps_mod = 100.0;
  double lambda_linear = 0.0;
  double lambda_quad = 0.0;
  std::optional<double> mean_soc;
  double p_g_bar = 0.0;
  std::size_t n = 0;
  double step_h = 1.0;

  double saidi_mod_minutes() const { return saidi_mod * step_h * 60.0; }
  double saidi_eps_mod_minutes() const { return saidi_eps_mod * step_h * 60.0; }

  nlohmann::json to_json() const;
};

ReliabilityReport report(const ImbalanceSeries& series, std::span<const double> residual,
                         std::optional<std::span<const double>> soc, double epsilon);

/// Report of the series with no storage action (R == Δ).
ReliabilityReport report_no_storage(const ImbalanceSeries& series, double epsilon);

}  // namespace gridres
