#include "gridres/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gridres/error.hpp"
#include "gridres/myopic.hpp"
#include "gridres/opt_convex.hpp"
#include "gridres/opt_mccormick.hpp"

namespace gridres::scenario {

Method parse_method(std::string_view text) {
  if (text == "alg1") return Method::Alg1;
  if (text == "alg2") return Method::Alg2;
  if (text == "alg3") return Method::Alg3;
  if (text == "convex") return Method::Convex;
  if (text == "mip") return Method::Mip;
  throw InputError("unknown method '" + std::string(text) + "' (expected alg1, alg2, alg3, convex or mip)");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Alg1: return "alg1";
    case Method::Alg2: return "alg2";
    case Method::Alg3: return "alg3";
    case Method::Convex: return "convex";
    case Method::Mip: return "mip";
  }
  return "?";
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

CsvSchema schema_from_json(const nlohmann::json& j) {
  CsvSchema s;
  s.col_time = j.value("col_time", s.col_time);
  s.col_delta = j.value("col_delta", s.col_delta);
  s.col_pg = j.value("col_pg", s.col_pg);
  if (j.contains("constant_pg")) s.constant_pg = j.at("constant_pg").get<double>();
  if (j.contains("step_h")) s.step_h = j.at("step_h").get<double>();
  s.negate_delta = j.value("negate_delta", false);
  s.fill_gaps = j.value("fill_gaps", false);
  return s;
}

std::string battery_tag(const Cell& c) { return c.has_battery ? fmt("%g", c.energy_mwh) + "MWh" : "none"; }

}  // namespace

ImbalanceSeries DataSource::load() const {
  ImbalanceSeries s = file ? load_csv(*file, schema) : synth(synth_n, synth_model, seed);
  if (resample_h) s = resample(s, *resample_h);
  return s;
}

void Scenario::validate() const {
  if (batteries.empty()) throw InputError("scenario: battery list is empty");
  if (epsilons.empty()) throw InputError("scenario: epsilon list is empty");
  if (methods.empty()) throw InputError("scenario: method list is empty");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw InputError("scenario: epsilon values must be non-negative");
  if (!(lambda >= 0.0)) throw InputError("scenario: lambda must be non-negative");
  if (!data.file && data.synth_n == 0) throw InputError("scenario: data needs a file or a synth block with n >= 1");
}

Scenario Scenario::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  Scenario sc;
  sc.name = j.value("name", sc.name);
  const auto& d = j.at("data");
  if (d.contains("file")) {
    std::filesystem::path p = d.at("file").get<std::string>();
    sc.data.file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    if (d.contains("schema")) sc.data.schema = schema_from_json(d.at("schema"));
  } else if (d.contains("synth")) {
    const auto& s = d.at("synth");
    sc.data.synth_n = s.at("n").get<std::size_t>();
    sc.data.seed = s.value("seed", std::uint64_t{0});
    sc.data.synth_model = SynthModel::from_json(s.value("model", nlohmann::json::object()));
  } else {
    throw InputError("scenario: data needs \"file\" or \"synth\"");
  }
  if (d.contains("resample_h")) sc.data.resample_h = d.at("resample_h").get<double>();

  for (const auto& b : j.at("batteries")) {
    if (b.is_null() || (b.is_string() && b.get<std::string>() == "none"))
      sc.batteries.emplace_back(std::nullopt);
    else if (b.is_number())
      sc.batteries.emplace_back(BatteryConfig{b.get<double>()});
    else
      sc.batteries.emplace_back(BatteryConfig::from_json(b));
  }
  sc.epsilons = j.at("epsilons").get<std::vector<double>>();
  for (const auto& m : j.at("methods")) sc.methods.push_back(parse_method(m.get<std::string>()));
  if (j.contains("cost")) sc.cost = parse_cost(j.at("cost").get<std::string>());
  sc.soc_penalty = j.value("soc_penalty", false);
  if (j.contains("soc_band")) sc.soc_band = SocBand::parse(j.at("soc_band").get<std::string>());
  sc.lambda = j.value("lambda", sc.lambda);
  sc.mip_max_horizon = j.value("mip_max_horizon", sc.mip_max_horizon);
  sc.parallel = j.value("parallel", true);
  sc.validate();
  return sc;
}

std::string Cell::label() const {
  if (!has_battery) return "No storage";
  return std::string(to_string(method)) + " " + fmt("%g", energy_mwh) + " MWh";
}

namespace {

void run_cell(const Scenario& sc, const ImbalanceSeries& series, Cell& cell) {
  try {
    const auto& cfg = sc.batteries[cell.battery_index];
    if (!cfg) {
      cell.report = report_no_storage(series, cell.epsilon);
      cell.ok = true;
      return;
    }
    const BatterySpec spec = cfg->spec();
    DispatchResult r;
    switch (cell.method) {
      case Method::Alg1:
      case Method::Alg2:
      case Method::Alg3: {
        auto policy = cell.method == Method::Alg1   ? myopic::Policy::Alg1
                      : cell.method == Method::Alg2 ? myopic::Policy::Alg2
                                                    : myopic::Policy::Alg3;
        r = myopic::run_policy(policy, spec, sc.soc_band, series, cell.epsilon, cfg->b0());
        break;
      }
      case Method::Convex:
      case Method::Mip: {
        ProblemSpec p;
        p.series = series;
        p.battery = spec;
        p.response = ResponseModel::with_epsilon(cell.epsilon);
        p.b0 = cfg->b0();
        p.cost = sc.cost;
        p.response_aware = true;
        if (sc.soc_penalty) p.soc_penalty = SocPenalty{sc.lambda, sc.soc_band};
        if (cell.method == Method::Convex) {
          r = convex::optimize(p);
        } else {
          mip::Options o;
          o.max_horizon = sc.mip_max_horizon;
          r = mip::solve(p, o).dispatch;
        }
        break;
      }
    }
    cell.report = *r.report;
    cell.dispatch = std::move(r);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
}

}  // namespace

SweepResult run_scenario(const Scenario& sc) {
  sc.validate();
  const ImbalanceSeries series = sc.data.load();

  SweepResult out;
  out.name = sc.name;
  out.n = series.size();
  out.step_h = series.step_h;
  for (std::size_t bi = 0; bi < sc.batteries.size(); ++bi) {
    for (double eps : sc.epsilons) {
      for (Method m : sc.methods) {
        Cell c;
        c.battery_index = bi;
        c.has_battery = sc.batteries[bi].has_value();
        c.energy_mwh = c.has_battery ? sc.batteries[bi]->energy_mwh : 0.0;
        c.epsilon = eps;
        c.method = m;
        out.cells.push_back(std::move(c));
      }
    }
  }

  const std::ptrdiff_t count = std::ptrdiff_t(out.cells.size());
#pragma omp parallel for schedule(dynamic) if (sc.parallel)
  for (std::ptrdiff_t k = 0; k < count; ++k) run_cell(sc, series, out.cells[std::size_t(k)]);

  out.marginals = marginal_benefit(out.cells);
  return out;
}

std::vector<Marginal> marginal_benefit(const std::vector<Cell>& cells) {
  // Keys in first-appearance order keep the output stable.
  std::vector<std::pair<Method, double>> keys;
  for (const auto& c : cells) {
    std::pair<Method, double> k{c.method, c.epsilon};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::vector<Marginal> out;
  for (const auto& [m, eps] : keys) {
    std::vector<const Cell*> row;
    for (const auto& c : cells)
      if (c.ok && c.method == m && c.epsilon == eps) row.push_back(&c);
    std::stable_sort(row.begin(), row.end(), [](const Cell* a, const Cell* b) { return a->energy_mwh < b->energy_mwh; });
    for (std::size_t k = 1; k < row.size(); ++k) {
      double de = row[k]->energy_mwh - row[k - 1]->energy_mwh;
      if (de <= 0.0) continue;
      out.push_back({m, eps, row[k - 1]->energy_mwh, row[k]->energy_mwh,
                     (row[k]->report.ri_eps_mod - row[k - 1]->report.ri_eps_mod) / de});
    }
  }
  return out;
}

std::string format_table(const SweepResult& result) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Optimization", "Battery (MWh)", "eps", "lambda_linear", "lambda_quad", "Mean SoC", "SAIDI_eps_mod",
                  "RI_eps_mod"});
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    const auto& r = c.report;
    rows.push_back({c.has_battery ? std::string(to_string(c.method)) : "No storage",
                    c.has_battery ? fmt("%.4f", c.energy_mwh) : "-", fmt("%.4f", c.epsilon),
                    fmt("%.4f", r.lambda_linear), fmt("%.4f", r.lambda_quad),
                    r.mean_soc ? fmt("%.4f", *r.mean_soc) : "-", fmt("%.4f", r.saidi_eps_mod),
                    fmt("%.4f", r.ri_eps_mod)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k == 0) {
        os << row[k] << std::string(width[k] - row[k].size(), ' ');
      } else {
        os << "  " << std::string(width[k] - row[k].size(), ' ') << row[k];
      }
    }
    os << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
  if (!f) throw InputError("write failed for " + path.string());
}

}  // namespace

void emit_report(const SweepResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "cells", ec);
  if (ec) throw InputError("cannot create " + (out_dir / "cells").string() + ": " + ec.message());

  nlohmann::json summary = {{"name", result.name}, {"n", result.n}, {"step_h", result.step_h}};
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    const auto& c = result.cells[k];
    nlohmann::json j = {{"method", to_string(c.method)},
                        {"battery_mwh", c.has_battery ? nlohmann::json(c.energy_mwh) : nlohmann::json(nullptr)},
                        {"epsilon", c.epsilon},
                        {"ok", c.ok}};
    if (!c.ok) {
      j["error"] = c.error;
    } else {
      j["report"] = c.report.to_json();
      if (c.dispatch) {
        j["objective"] = c.dispatch->objective;
        j["complementarity_violations"] = c.dispatch->complementarity_violations;
      }
    }
    cells.push_back(j);

    char name[160];
    std::snprintf(name, sizeof name, "%03zu_%s_%s_eps%g.json", k, std::string(to_string(c.method)).c_str(),
                  battery_tag(c).c_str(), c.epsilon);
    nlohmann::json full = j;
    if (c.ok && c.dispatch) full["dispatch"] = c.dispatch->to_json(false);
    write_file(out_dir / "cells" / name, full.dump(2) + "\n");
  }
  summary["cells"] = cells;

  nlohmann::json marg = nlohmann::json::array();
  std::string mcsv = "method,epsilon,from_mwh,to_mwh,ri_per_mwh\n";
  for (const auto& m : result.marginals) {
    marg.push_back({{"method", to_string(m.method)},
                    {"epsilon", m.epsilon},
                    {"from_mwh", m.from_mwh},
                    {"to_mwh", m.to_mwh},
                    {"ri_per_mwh", m.ri_per_mwh}});
    mcsv += std::string(to_string(m.method)) + "," + fmt("%.17g", m.epsilon) + "," + fmt("%.17g", m.from_mwh) + "," +
            fmt("%.17g", m.to_mwh) + "," + fmt("%.17g", m.ri_per_mwh) + "\n";
  }
  summary["marginals"] = marg;

  std::string rcsv = "method,battery_mwh,epsilon,ri_eps_mod,saidi_eps_mod,lambda_linear,lambda_quad\n";
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    rcsv += std::string(c.has_battery ? to_string(c.method) : "none") + "," + fmt("%.17g", c.energy_mwh) + "," +
            fmt("%.17g", c.epsilon) + "," + fmt("%.17g", c.report.ri_eps_mod) + "," +
            fmt("%.17g", c.report.saidi_eps_mod) + "," + fmt("%.17g", c.report.lambda_linear) + "," +
            fmt("%.17g", c.report.lambda_quad) + "\n";
  }

  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_file(out_dir / "summary.table.txt", format_table(result));
  write_file(out_dir / "ri_vs_eps.csv", rcsv);
  write_file(out_dir / "marginal.csv", mcsv);
}

}  // namespace gridres::scenario
