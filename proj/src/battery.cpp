#include "gridres/battery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridres/error.hpp"

namespace gridres {

namespace {
// Relative slack admitted when checking bounds after floating-point updates.
constexpr double kBoundSlack = 1e-9;
}  // namespace

void BatterySpec::validate() const {
  if (!(b_min >= 0.0) || !(b_min < b_max)) throw InputError("battery: need 0 <= b_min < b_max");
  if (!(b_rated >= b_max)) throw InputError("battery: b_rated must be at least b_max");
  if (!(delta_max > 0.0)) throw InputError("battery: delta_max must be positive");
  if (!(delta_min < 0.0)) throw InputError("battery: delta_min must be negative");
  if (!(eta_ch > 0.0 && eta_ch <= 1.0) || !(eta_dis > 0.0 && eta_dis <= 1.0))
    throw InputError("battery: efficiencies must lie in (0, 1]");
}

BatterySpec BatterySpec::from_c_rating(double energy_mwh, double c_charge, double c_discharge, double eta_ch,
                                       double eta_dis) {
  BatterySpec spec;
  spec.b_min = 0.0;
  spec.b_max = energy_mwh;
  spec.b_rated = energy_mwh;
  spec.delta_max = c_charge * energy_mwh;
  spec.delta_min = -c_discharge * energy_mwh;
  spec.eta_ch = eta_ch;
  spec.eta_dis = eta_dis;
  spec.validate();
  return spec;
}

BatterySpec BatterySpec::narrowed(double soc_lo, double soc_hi) const {
  BatterySpec out = *this;
  out.b_min = std::max(b_min, soc_lo * b_rated);
  out.b_max = std::min(b_max, soc_hi * b_rated);
  out.validate();
  return out;
}

BatteryConfig BatteryConfig::from_json(const nlohmann::json& j) {
  BatteryConfig c;
  c.energy_mwh = j.at("energy_mwh").get<double>();
  c.c_charge = j.value("c_charge", c.c_charge);
  c.c_discharge = j.value("c_discharge", c.c_discharge);
  c.eta_ch = j.value("eta_ch", c.eta_ch);
  c.eta_dis = j.value("eta_dis", c.eta_dis);
  c.soc0 = j.value("soc0", c.soc0);
  if (!(c.soc0 >= 0.0 && c.soc0 <= 1.0)) throw InputError("battery: soc0 must lie in [0, 1]");
  c.spec();  // validates
  return c;
}

nlohmann::json BatteryConfig::to_json() const {
  return {{"energy_mwh", energy_mwh}, {"c_charge", c_charge}, {"c_discharge", c_discharge},
          {"eta_ch", eta_ch},         {"eta_dis", eta_dis},   {"soc0", soc0}};
}

double apply(const BatterySpec& spec, double b_prev, double s) noexcept {
  return s >= 0.0 ? b_prev + s * spec.eta_ch : b_prev + s / spec.eta_dis;
}

double energy_for(const BatterySpec& spec, double b_prev, double b_next) noexcept {
  double db = b_next - b_prev;
  return db >= 0.0 ? db / spec.eta_ch : db * spec.eta_dis;
}

double step(const BatterySpec& spec, double b_prev, double s) {
  double b = apply(spec, b_prev, s);
  double slack = kBoundSlack * std::max(1.0, spec.b_rated);
  if (b < spec.b_min - slack)
    throw BoundViolation(BoundViolation::Side::Lower, "battery energy " + std::to_string(b) + " below b_min");
  if (b > spec.b_max + slack)
    throw BoundViolation(BoundViolation::Side::Upper, "battery energy " + std::to_string(b) + " above b_max");
  return std::clamp(b, spec.b_min, spec.b_max);
}

EnergyRange feasible_range(const BatterySpec& spec, double b_prev, double h) {
  double hi = std::min(spec.delta_max * h, (spec.b_max - b_prev) / spec.eta_ch);
  double lo = std::max(spec.delta_min * h, (spec.b_min - b_prev) * spec.eta_dis);
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

double mean_soc(std::span<const double> soc) {
  if (soc.empty()) throw InputError("mean_soc: empty trajectory");
  double sum = 0.0;
  for (double v : soc) sum += v;
  return sum / double(soc.size());
}

double mean_soc(std::span<const BatteryState> trajectory) {
  if (trajectory.empty()) throw InputError("mean_soc: empty trajectory");
  double sum = 0.0;
  for (const auto& st : trajectory) sum += st.soc;
  return sum / double(trajectory.size());
}

}  // namespace gridres
