// gridres: reliability indices and battery dispatch from the command line.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridres/error.hpp"
#include "gridres/metrics.hpp"
#include "gridres/myopic.hpp"
#include "gridres/opt_convex.hpp"
#include "gridres/opt_mccormick.hpp"
#include "gridres/oracle.hpp"
#include "gridres/scenario.hpp"
#include "gridres/timeseries.hpp"

using namespace gridres;
using nlohmann::json;

namespace {

struct DataArgs {
  std::string path;
  CsvSchema schema;
  double pg = 0.0;
  double step_h = 0.0;

  void attach(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--data", path, "Imbalance CSV");
    if (required) opt->required();
    app->add_option("--col-delta", schema.col_delta, "Imbalance column (MW)");
    app->add_option("--col-pg", schema.col_pg, "Scheduled generation column (MW)");
    app->add_option("--col-time", schema.col_time, "Timestamp column");
    app->add_option("--pg", pg, "Constant generation (MW) instead of a column");
    app->add_option("--step-h", step_h, "Sample step in hours instead of inferring it");
    app->add_flag("--negate", schema.negate_delta, "Flip the sign of the imbalance column");
    app->add_flag("--fill-gaps", schema.fill_gaps, "Interpolate missing samples");
  }

  ImbalanceSeries load() {
    if (pg > 0.0) schema.constant_pg = pg;
    if (step_h > 0.0) schema.step_h = step_h;
    return load_csv(path, schema);
  }
};

struct ProblemArgs {
  std::string cost = "linear";
  std::optional<double> epsilon;
  std::string soc_band;
  double lambda = 1.0;
  std::string battery;

  void attach(CLI::App* app) {
    app->add_option("--cost", cost, "linear or quadratic")->check(CLI::IsMember({"linear", "quadratic"}));
    app->add_option("--epsilon", epsilon, "Response band as a fraction of P_g");
    app->add_option("--soc-band", soc_band, "Preferred SoC window L:U, enables the SoC penalty");
    app->add_option("--lambda", lambda, "SoC penalty weight");
    app->add_option("--battery", battery, "Battery JSON file")->required();
  }

  ProblemSpec build(ImbalanceSeries series) const {
    BatteryConfig cfg = load_battery(battery);
    const bool linear = parse_cost(cost) == CostKind::Linear;
    Variant v;
    if (!soc_band.empty())
      v = linear ? Variant::LinearResponseSoc : Variant::QuadraticResponseSoc;
    else if (epsilon)
      v = linear ? Variant::LinearResponse : Variant::QuadraticResponse;
    else
      v = linear ? Variant::Linear : Variant::Quadratic;
    SocBand band = soc_band.empty() ? SocBand(0.4, 0.8) : SocBand::parse(soc_band);
    return make_problem(v, std::move(series), cfg.spec(), epsilon.value_or(0.0), cfg.b0(), lambda, band);
  }

  static BatteryConfig load_battery(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open battery file " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError("battery file " + path + ": " + e.what());
    }
    if (j.is_number()) return BatteryConfig::from_json(json{{"energy_mwh", j}});
    return BatteryConfig::from_json(j);
  }
};

void write_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw InputError("cannot write " + out);
  f << j.dump(2) << '\n';
}

json read_json_arg(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '[')) return json::parse(text);
  std::ifstream in(text);
  if (!in) throw InputError("cannot open " + text);
  return json::parse(in);
}

void check_dynamics(const ProblemSpec& spec, const DispatchResult& r, double tol) {
  double v = dynamics_violation(spec, r);
  if (v > tol) throw Error("dispatch violates the battery limits by " + std::to_string(v) + " MWh");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Response-aware reliability indices and battery dispatch"};
  app.require_subcommand(1);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Reliability indices of a series without storage");
  DataArgs m_data;
  std::vector<double> m_eps{0.0};
  std::string m_out;
  m_data.attach(metrics);
  metrics->add_option("--epsilon", m_eps, "One or more response bands");
  metrics->add_option("--out", m_out, "Output JSON (default stdout)");

  // ri
  auto* ri = app.add_subcommand("ri", "RI from a SAIDI value and a horizon");
  double ri_saidi = 0.0, ri_horizon = 0.0;
  ri->add_option("--saidi", ri_saidi)->required();
  ri->add_option("--horizon", ri_horizon)->required();

  // dispatch
  auto* dispatch = app.add_subcommand("dispatch", "Run a myopic threshold policy");
  DataArgs d_data;
  std::string d_policy = "alg2", d_band, d_battery, d_out;
  double d_eps = 0.0;
  d_data.attach(dispatch);
  dispatch->add_option("--policy", d_policy)->check(CLI::IsMember({"alg1", "alg2", "alg3"}));
  dispatch->add_option("--epsilon", d_eps);
  dispatch->add_option("--soc-band", d_band, "SoC window L:U for alg3");
  dispatch->add_option("--battery", d_battery, "Battery JSON file")->required();
  dispatch->add_option("--out", d_out);

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Deterministic horizon optimization");
  DataArgs o_data;
  ProblemArgs o_prob;
  std::string o_method = "convex", o_out;
  std::size_t o_max_horizon = 24;
  std::optional<double> o_tol;
  double o_dyn_tol = 1e-8;
  bool o_timing = false;
  o_data.attach(optimize);
  o_prob.attach(optimize);
  optimize->add_option("--method", o_method)->check(CLI::IsMember({"convex", "mip"}));
  optimize->add_option("--max-horizon", o_max_horizon, "Largest horizon accepted by the MIP");
  optimize->add_option("--tol", o_tol, "Solver optimality tolerance");
  optimize->add_option("--dyn-tol", o_dyn_tol, "Allowed violation of the battery dynamics (MWh)");
  optimize->add_flag("--timing", o_timing, "Include wall times in the output");
  optimize->add_option("--out", o_out);

  // verify
  auto* verify = app.add_subcommand("verify", "Compare convex, MIP and brute force on a short series");
  DataArgs v_data;
  ProblemArgs v_prob;
  int v_levels = 21;
  v_data.attach(verify);
  v_prob.attach(verify);
  verify->add_option("--levels", v_levels, "Oracle grid points per step");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Battery size x epsilon x method sweep");
  std::string s_scenario, s_out;
  sweep->add_option("--scenario", s_scenario)->required();
  sweep->add_option("--out", s_out)->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic imbalance series");
  std::size_t y_n = 0;
  std::string y_model = "{}", y_out;
  std::uint64_t y_seed = 0;
  synth_cmd->add_option("-n,--n", y_n)->required();
  synth_cmd->add_option("--model", y_model, "Model JSON (inline or file)");
  synth_cmd->add_option("--seed", y_seed);
  synth_cmd->add_option("--out", y_out)->required();

  // resample
  auto* resample_cmd = app.add_subcommand("resample", "Bin-average to a coarser step");
  DataArgs r_data;
  double r_step = 0.0;
  std::string r_out;
  r_data.attach(resample_cmd);
  resample_cmd->add_option("--to-h", r_step, "New step in hours")->required();
  resample_cmd->add_option("--out", r_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*metrics) {
      auto series = m_data.load();
      json out = json::array();
      for (double e : m_eps) out.push_back(report_no_storage(series, e).to_json());
      write_json(out.size() == 1 ? out[0] : out, m_out);
    } else if (*ri) {
      std::printf("%.10f\n", ri_from_saidi(ri_saidi, ri_horizon));
    } else if (*dispatch) {
      auto series = d_data.load();
      BatteryConfig cfg = ProblemArgs::load_battery(d_battery);
      std::optional<SocBand> band;
      if (!d_band.empty()) band = SocBand::parse(d_band);
      auto policy = myopic::parse_policy(d_policy);
      if (policy == myopic::Policy::Alg3 && !band) band = SocBand(0.4, 0.8);
      auto r = myopic::run_policy(policy, cfg.spec(), band, series, d_eps, cfg.b0());
      write_json(r.to_json(false), d_out);
    } else if (*optimize) {
      auto spec = o_prob.build(o_data.load());
      DispatchResult r;
      if (o_method == "convex") {
        convex::Options opt;
        if (o_tol) opt.tolerance = *o_tol;
        r = convex::optimize(spec, opt);
      } else {
        mip::Options opt;
        opt.max_horizon = o_max_horizon;
        if (o_tol) opt.qp_tolerance = *o_tol;
        r = mip::solve(spec, opt).dispatch;
      }
      check_dynamics(spec, r, o_dyn_tol);
      json j = r.to_json(o_timing);
      j["variant"] = std::string(to_string(spec.variant()));
      write_json(j, o_out);
    } else if (*verify) {
      auto spec = v_prob.build(v_data.load());
      oracle::OracleConfig cfg;
      cfg.levels = v_levels;
      auto o = oracle::brute_force(spec, cfg);
      auto c = convex::optimize(spec);
      auto m = mip::solve(spec).dispatch;
      const double tol = std::max(1e-6, 1e-4 * std::abs(o.objective));
      bool convex_ok = c.complementarity_violations > 0 || std::abs(c.objective - o.objective) <= tol;
      bool mip_ok = std::abs(m.objective - o.objective) <= tol;
      json j = {{"variant", std::string(to_string(spec.variant()))},
                {"oracle", o.objective},
                {"convex", c.objective},
                {"convex_violations", c.complementarity_violations},
                {"mip", m.objective},
                {"mip_certified", m.stats.certified},
                {"tolerance", tol},
                {"convex_ok", convex_ok},
                {"mip_ok", mip_ok}};
      write_json(j, "");
      return convex_ok && mip_ok ? 0 : 1;
    } else if (*sweep) {
      std::ifstream in(s_scenario);
      if (!in) throw InputError("cannot open scenario " + s_scenario);
      auto sc = scenario::Scenario::from_json(json::parse(in), std::filesystem::path(s_scenario).parent_path());
      auto result = scenario::run_scenario(sc);
      scenario::emit_report(result, s_out);
      std::cout << scenario::format_table(result);
      std::size_t failed = 0;
      for (const auto& c : result.cells) failed += !c.ok;
      if (failed) std::cerr << failed << " cell(s) failed, see " << s_out << "/summary.json\n";
    } else if (*synth_cmd) {
      auto model = SynthModel::from_json(read_json_arg(y_model));
      write_csv(y_out, synth(y_n, model, y_seed));
    } else if (*resample_cmd) {
      write_csv(r_out, resample(r_data.load(), r_step));
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
