#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridres/error.hpp"
#include "gridres/scenario.hpp"

using namespace gridres;
using namespace gridres::scenario;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_scenario() {
  return nlohmann::json::parse(R"({
    "name": "small",
    "data": {"synth": {"n": 288, "seed": 3,
             "model": {"step_h": 0.0833333333333333, "volatility": 300, "generation": {"base_mw": 10000},
                       "events_per_day": 4, "event_fraction": 0.02, "event_samples": 3}}},
    "batteries": [null, 50, {"energy_mwh": 200, "eta_ch": 0.95, "eta_dis": 0.95}],
    "epsilons": [0, 0.005],
    "methods": ["alg2", "alg3", "convex"]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gridres_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("scenario parsing and validation") {
  auto sc = Scenario::from_json(small_scenario());
  CHECK(sc.batteries.size() == 3);
  CHECK_FALSE(sc.batteries[0]);
  CHECK(sc.batteries[1]->energy_mwh == 50);
  CHECK(sc.batteries[2]->eta_ch == 0.95);
  CHECK(sc.methods.size() == 3);

  auto j = small_scenario();
  j["methods"] = nlohmann::json::array();
  CHECK_THROWS_AS(Scenario::from_json(j), InputError);
  j = small_scenario();
  j["epsilons"] = {-0.1};
  CHECK_THROWS_AS(Scenario::from_json(j), InputError);
  j = small_scenario();
  j["methods"] = {"alg9"};
  CHECK_THROWS_AS(Scenario::from_json(j), InputError);
}

TEST_CASE("no-storage sweep reproduces the raw report") {
  auto j = small_scenario();
  j["batteries"] = {nullptr};
  j["methods"] = {"alg1"};
  j["epsilons"] = {0.0, 0.001, 0.01};
  auto sc = Scenario::from_json(j);
  auto res = run_scenario(sc);
  auto series = sc.data.load();
  REQUIRE(res.cells.size() == 3);
  for (const auto& c : res.cells) {
    REQUIRE(c.ok);
    auto direct = report_no_storage(series, c.epsilon);
    CHECK(c.report.ri_eps_mod == direct.ri_eps_mod);
    CHECK(c.report.lambda_linear == direct.lambda_linear);
  }
  auto table = format_table(res);
  CHECK(table.find("No storage") != std::string::npos);
}

TEST_CASE("sweep: counts, marginals and failures") {
  auto j = small_scenario();
  j["methods"] = {"alg2", "convex", "mip"};
  auto res = run_scenario(Scenario::from_json(j));
  CHECK(res.cells.size() == 3 * 2 * 3);
  std::size_t failed = 0;
  for (const auto& c : res.cells) {
    if (!c.ok) {
      ++failed;
      CHECK(c.method == Method::Mip);
      CHECK(c.error.find("horizon") != std::string::npos);
    }
  }
  CHECK(failed == 2 * 2);  // mip refuses 288 steps for both batteries at both ε

  std::size_t rows = 0;
  std::istringstream table(format_table(res));
  for (std::string line; std::getline(table, line);) ++rows;
  CHECK(rows - 1 == res.cells.size() - failed);

  // Finite differences of ri_eps_mod over battery size.
  for (const auto& m : res.marginals) {
    const Cell* lo = nullptr;
    const Cell* hi = nullptr;
    for (const auto& c : res.cells) {
      if (!c.ok || c.method != m.method || c.epsilon != m.epsilon) continue;
      if (c.energy_mwh == m.from_mwh) lo = &c;
      if (c.energy_mwh == m.to_mwh) hi = &c;
    }
    REQUIRE(lo);
    REQUIRE(hi);
    CHECK(m.ri_per_mwh == doctest::Approx((hi->report.ri_eps_mod - lo->report.ri_eps_mod) / (m.to_mwh - m.from_mwh)));
  }
  // Convex cells: larger battery never lowers reliability.
  for (double eps : {0.0, 0.005}) {
    double prev = -1;
    for (const auto& c : res.cells)
      if (c.ok && c.method == Method::Convex && c.epsilon == eps) {
        CHECK(c.report.ri_eps_mod >= prev - 1e-9);
        prev = c.report.ri_eps_mod;
      }
  }
}

TEST_CASE("reports are byte-identical across runs") {
  auto sc = Scenario::from_json(small_scenario());
  auto a = scratch("a"), b = scratch("b");
  emit_report(run_scenario(sc), a);
  sc.parallel = false;
  emit_report(run_scenario(sc), b);
  for (const char* f : {"summary.json", "summary.table.txt", "ri_vs_eps.csv", "marginal.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "cells")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(b / "cells" / e.path().filename()));
  }
  CHECK(files == 18);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("csv data source relative to the scenario file") {
  auto dir = scratch("csv");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "data.csv");
    f << "time,delta,p_g\n0,100,1000\n3600,-50,1000\n7200,20,1000\n10800,-80,1000\n";
  }
  auto j = nlohmann::json::parse(R"({"data": {"file": "data.csv"}, "batteries": [null, 60],
                                      "epsilons": [0.01], "methods": ["alg1", "mip"]})");
  auto sc = Scenario::from_json(j, dir);
  auto res = run_scenario(sc);
  for (const auto& c : res.cells) CHECK(c.ok);
  CHECK_THROWS_AS(emit_report(res, "/proc/gridres_cannot_write_here"), InputError);
  fs::remove_all(dir);
}
