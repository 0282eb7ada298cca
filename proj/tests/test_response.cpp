#include <doctest.h>

#include "gridres/error.hpp"
#include "gridres/metrics.hpp"
#include "gridres/response.hpp"

using namespace gridres;

TEST_CASE("nadir") {
  CHECK(nadir(1000, 0, 50, 0.02) == doctest::Approx(49.98));
  CHECK(nadir(1000, 100, 50, 0.02) == doctest::Approx(50.0 - 0.02 - 100.0 / 2000.0));
  CHECK(nadir(1000, 100, 50, 0.02) == doctest::Approx(49.93));
  double drop1 = 50 - 0.02 - nadir(500, 80, 50, 0.02);
  double drop2 = 50 - 0.02 - nadir(1000, 80, 50, 0.02);
  CHECK(drop2 == doctest::Approx(drop1 / 2));
  CHECK_THROWS_AS(nadir(0, 1, 50, 0), InputError);
  CHECK_THROWS_AS(nadir(1, -1, 50, 0), InputError);
}

TEST_CASE("max safe imbalance") {
  CHECK(max_safe_imbalance(ResponseModel::with_epsilon(0), 12345) == 0.0);
  CHECK(max_safe_imbalance(ResponseModel::with_epsilon(0.005), 10000) == doctest::Approx(50.0));
  CHECK_THROWS_AS(ResponseModel{}.resolved_epsilon(), InputError);
  CHECK_THROWS_AS(ResponseModel::with_epsilon(-0.1), InputError);
}

TEST_CASE("epsilon from physical parameters") {
  ResponseModel m;
  m.physical = PhysicalResponse{50.0, 0.02, 0.5, 0.01};
  CHECK(m.resolved_epsilon() == doctest::Approx(2 * 0.01 * (0.5 - 0.02)));
  // The band edge produces exactly the allowed nadir.
  const double pg = 8000;
  const double r = max_safe_imbalance(m, pg);
  CHECK(nadir(0.01 * pg, r, 50.0, 0.02) == doctest::Approx(50.0 - 0.5));

  auto j = ResponseModel::from_json(nlohmann::json::parse(R"({"f0": 60, "f_db": 0.036, "delta_f_allow": 0.5, "mhc_per_pg": 0.02})"));
  CHECK(j.resolved_epsilon() == doctest::Approx(2 * 0.02 * (0.5 - 0.036)));
  CHECK(ResponseModel::from_json(nlohmann::json::parse(R"({"epsilon": 0.01})")).resolved_epsilon() == 0.01);
  CHECK_THROWS_AS(ResponseModel::from_json(nlohmann::json::parse(R"({"f0": 50})")), InputError);
  CHECK_THROWS_AS(
      ResponseModel::from_json(nlohmann::json::parse(R"({"f_db": 0.5, "delta_f_allow": 0.1, "mhc_per_pg": 0.02})")),
      InputError);
}

TEST_CASE("band") {
  auto s = ImbalanceSeries::make({0, 0, 0}, {8000, 8000, 4000}, 1.0);
  auto b = band(ResponseModel::with_epsilon(0.01), s);
  CHECK(b.hi[0] == doctest::Approx(80));
  CHECK(b.lo[0] == doctest::Approx(-80));
  CHECK(b.hi[1] == b.hi[0]);
  CHECK(b.hi[2] == doctest::Approx(b.hi[0] / 2));
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.lo[i] == -b.hi[i]);
}

TEST_CASE("residuals inside the band cost nothing") {
  auto s = ImbalanceSeries::constant_generation({79, -79, 10, 0}, 8000, 1.0);
  auto rep = report_no_storage(s, 0.01);
  CHECK(rep.saidi_eps_mod == 0.0);
  CHECK(rep.ri_eps_mod == 100.0);
}
