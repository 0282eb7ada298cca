#include "gridres/metrics.hpp"

#include <cmath>

#include "gridres/battery.hpp"
#include "gridres/error.hpp"
#include "gridres/kernels.hpp"

namespace gridres {

double saidi_classic(std::span<const Interruption> interruptions, double total_customers) {
  if (!(total_customers > 0.0)) throw InputError("saidi_classic: total customers must be positive");
  double sum = 0.0;
  for (const auto& it : interruptions) {
    if (it.duration < 0.0 || it.customers < 0.0) throw InputError("saidi_classic: negative duration or customer count");
    sum += it.duration * it.customers;
  }
  return sum / total_customers;
}

double ri_from_saidi(double saidi, double horizon) {
  if (!(horizon > 0.0)) throw InputError("ri_from_saidi: horizon must be positive");
  if (saidi < 0.0) throw InputError("ri_from_saidi: saidi must be non-negative");
  if (saidi > horizon) throw InputError("ri_from_saidi: saidi exceeds the horizon");
  return 100.0 * (1.0 - saidi / horizon);
}

std::vector<double> residuals(const ImbalanceSeries& series, std::span<const double> dispatch_mw) {
  if (dispatch_mw.size() != series.size()) throw InputError("residuals: dispatch length does not match the series");
  std::vector<double> r(series.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = series.delta[i] + dispatch_mw[i];
  return r;
}

ReliabilityReport report(const ImbalanceSeries& series, std::span<const double> residual,
                         std::optional<std::span<const double>> soc, double epsilon) {
  if (!(epsilon >= 0.0)) throw InputError("report: epsilon must be non-negative");
  if (residual.size() != series.size()) throw InputError("report: residual length does not match the series");

  auto sums = kernels::hinge_sums(residual, series.p_g, epsilon);
  if (!(sums.generation > 0.0)) throw InputError("report: total generation is zero");

  ReliabilityReport rep;
  rep.epsilon = epsilon;
  rep.n = series.size();
  rep.step_h = series.step_h;
  rep.p_g_bar = sums.generation / double(rep.n);
  rep.saidi_mod = sums.abs_residual / rep.p_g_bar;
  rep.saidi_eps_mod = sums.hinge / rep.p_g_bar;
  rep.ri_mod = 100.0 * (1.0 - sums.abs_residual / sums.generation);
  rep.ri_eps_mod = 100.0 * (1.0 - sums.hinge / sums.generation);
  rep.lambda_linear = 100.0 * sums.hinge / rep.p_g_bar;
  rep.lambda_quad = 100.0 * sums.hinge_sq / (rep.p_g_bar * rep.p_g_bar);
  if (soc) rep.mean_soc = mean_soc(*soc);
  return rep;
}

ReliabilityReport report_no_storage(const ImbalanceSeries& series, double epsilon) {
  return report(series, series.delta, std::nullopt, epsilon);
}

nlohmann::json ReliabilityReport::to_json() const {
  nlohmann::json j = {{"epsilon", epsilon},
                      {"n", n},
                      {"step_h", step_h},
                      {"p_g_bar", p_g_bar},
                      {"saidi_mod", saidi_mod},
                      {"saidi_mod_minutes", saidi_mod_minutes()},
                      {"saidi_eps_mod", saidi_eps_mod},
                      {"saidi_eps_mod_minutes", saidi_eps_mod_minutes()},
                      {"ri_mod", ri_mod},
                      {"ri_eps_mod", ri_eps_mod},
                      {"lambda_linear", lambda_linear},
                      {"lambda_quad", lambda_quad}};
  j["mean_soc"] = mean_soc ? nlohmann::json(*mean_soc) : nlohmann::json(nullptr);
  return j;
}

}  // namespace gridres
