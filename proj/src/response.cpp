#include "gridres/response.hpp"

#include <cmath>

#include "gridres/error.hpp"

namespace gridres {

ResponseModel ResponseModel::with_epsilon(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("epsilon must be non-negative");
  ResponseModel m;
  m.epsilon = eps;
  return m;
}

double ResponseModel::resolved_epsilon() const {
  if (epsilon) {
    if (!(*epsilon >= 0.0)) throw InputError("epsilon must be non-negative");
    return *epsilon;
  }
  if (!physical) throw InputError("response model needs epsilon or physical parameters");
  const auto& p = *physical;
  if (!(p.mhc_per_pg > 0.0)) throw InputError("mhc_per_pg must be positive");
  if (!(p.delta_f_allow > p.f_db)) throw InputError("delta_f_allow must exceed the governor dead-band");
  return 2.0 * p.mhc_per_pg * (p.delta_f_allow - p.f_db);
}

ResponseModel ResponseModel::from_json(const nlohmann::json& j) {
  ResponseModel m;
  if (j.contains("epsilon")) {
    m = with_epsilon(j.at("epsilon").get<double>());
  } else if (j.contains("mhc_per_pg")) {
    PhysicalResponse p;
    p.f0 = j.value("f0", p.f0);
    p.f_db = j.value("f_db", p.f_db);
    p.delta_f_allow = j.at("delta_f_allow").get<double>();
    p.mhc_per_pg = j.at("mhc_per_pg").get<double>();
    m.physical = p;
  } else {
    throw InputError("response: expected 'epsilon' or physical parameters");
  }
  m.resolved_epsilon();  // validates
  return m;
}

double nadir(double mhc, double r, double f0, double f_db) {
  if (!(mhc > 0.0)) throw InputError("nadir: M_H*C must be positive");
  if (r < 0.0) throw InputError("nadir: imbalance magnitude must be non-negative");
  return f0 - f_db - r / (2.0 * mhc);
}

double max_safe_imbalance(const ResponseModel& model, double p_g) {
  if (p_g < 0.0) throw InputError("max_safe_imbalance: p_g must be non-negative");
  return model.resolved_epsilon() * p_g;
}

ImbalanceBand band(const ResponseModel& model, const ImbalanceSeries& series) {
  double eps = model.resolved_epsilon();
  ImbalanceBand b;
  b.lo.resize(series.size());
  b.hi.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    b.hi[i] = eps * series.p_g[i];
    b.lo[i] = -b.hi[i];
  }
  return b;
}

}  // namespace gridres
