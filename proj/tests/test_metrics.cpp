#include <doctest.h>

#include <random>

#include "gridres/error.hpp"
#include "gridres/metrics.hpp"
#include "support/reference.hpp"

using namespace gridres;

TEST_CASE("classical saidi") {
  std::vector<Interruption> one{{60.0, 100.0}};
  CHECK(saidi_classic(one, 1000.0) == doctest::Approx(6.0));
  CHECK(saidi_classic({}, 500.0) == 0.0);
  std::vector<Interruption> two{{480.0, 10.0}, {120.0, 90.0}};
  CHECK(saidi_classic(two, 100.0) == doctest::Approx((480.0 * 10 + 120.0 * 90) / 100.0));
  CHECK_THROWS_AS(saidi_classic(one, 0.0), InputError);
  std::vector<Interruption> neg{{-1.0, 1.0}};
  CHECK_THROWS_AS(saidi_classic(neg, 10.0), InputError);
}

TEST_CASE("ri from saidi") {
  CHECK(ri_from_saidi(0.0, 100.0) == 100.0);
  CHECK(ri_from_saidi(480.0, 744600.0) == doctest::Approx(100.0 * (1.0 - 480.0 / 744600.0)).epsilon(1e-14));
  CHECK(ri_from_saidi(515.5, 44640.0) == doctest::Approx(98.845).epsilon(1e-5));
  CHECK_THROWS_AS(ri_from_saidi(2.0, 1.0), InputError);
  CHECK_THROWS_AS(ri_from_saidi(0.0, 0.0), InputError);
}

TEST_CASE("residuals") {
  auto s = ImbalanceSeries::constant_generation({10, -5}, 100, 1.0);
  std::vector<double> disp{-4, 2};
  CHECK(residuals(s, disp) == std::vector<double>{6, -3});
  std::vector<double> cancel{-10, 5};
  CHECK(residuals(s, cancel) == std::vector<double>{0, 0});
  std::vector<double> zero{0, 0};
  CHECK(residuals(s, zero) == s.delta);
  std::vector<double> short_s{1};
  CHECK_THROWS_AS(residuals(s, short_s), InputError);
}

TEST_CASE("report matches the definitions") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-300, 300), g(800, 1200);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> d(97), pg(97);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = u(rng);
      pg[i] = g(rng);
    }
    auto series = ImbalanceSeries::make(d, pg, 0.25);
    const double eps = t % 5 == 0 ? 0.0 : 0.05 * (t % 7);
    auto rep = report_no_storage(series, eps);
    auto ref = reference::indices(d, pg, eps);
    CHECK(rep.saidi_mod == doctest::Approx(ref.saidi_mod).epsilon(1e-12));
    CHECK(rep.saidi_eps_mod == doctest::Approx(ref.saidi_eps_mod).epsilon(1e-12));
    CHECK(rep.ri_mod == doctest::Approx(ref.ri_mod).epsilon(1e-12));
    CHECK(rep.ri_eps_mod == doctest::Approx(ref.ri_eps_mod).epsilon(1e-12));
    CHECK(rep.lambda_linear == doctest::Approx(ref.lambda_linear).epsilon(1e-12));
    CHECK(rep.lambda_quad == doctest::Approx(ref.lambda_quad).epsilon(1e-12));
    CHECK(rep.ri_mod == doctest::Approx(100.0 * (1.0 - rep.saidi_mod / double(d.size()))).epsilon(1e-9));
    CHECK(rep.saidi_eps_mod <= rep.saidi_mod);
    CHECK(rep.ri_eps_mod >= rep.ri_mod);
    if (eps == 0.0) CHECK(rep.saidi_eps_mod == rep.saidi_mod);
  }
}

TEST_CASE("report of zero residuals and mean soc") {
  auto series = ImbalanceSeries::constant_generation({0, 0, 0}, 1000, 1.0);
  std::vector<double> r{0, 0, 0}, soc{0.4, 0.8, 0.6};
  auto rep = report(series, r, std::span<const double>(soc), 0.01);
  CHECK(rep.saidi_mod == 0.0);
  CHECK(rep.ri_mod == 100.0);
  CHECK(rep.lambda_quad == 0.0);
  REQUIRE(rep.mean_soc);
  CHECK(*rep.mean_soc == doctest::Approx(0.6));
  CHECK_FALSE(report_no_storage(series, 0.0).mean_soc);
  CHECK_THROWS_AS(report(series, r, std::nullopt, -0.1), InputError);
}

TEST_CASE("scale covariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<double> d(40), pg(40, 900.0);
  for (auto& v : d) v = u(rng);
  auto a = report_no_storage(ImbalanceSeries::make(d, pg, 1.0), 0.02);
  for (auto& v : d) v *= 3.5;
  for (auto& v : pg) v *= 3.5;
  auto b = report_no_storage(ImbalanceSeries::make(d, pg, 1.0), 0.02);
  CHECK(b.saidi_mod == doctest::Approx(a.saidi_mod).epsilon(1e-12));
  CHECK(b.ri_mod == doctest::Approx(a.ri_mod).epsilon(1e-12));
  CHECK(b.ri_eps_mod == doctest::Approx(a.ri_eps_mod).epsilon(1e-12));
  CHECK(b.lambda_linear == doctest::Approx(a.lambda_linear).epsilon(1e-12));
  CHECK(b.lambda_quad == doctest::Approx(a.lambda_quad).epsilon(1e-12));
}

TEST_CASE("report json and minutes") {
  auto series = ImbalanceSeries::constant_generation({100, -100}, 1000, 1.0 / 12.0);
  auto rep = report_no_storage(series, 0.0);
  CHECK(rep.saidi_mod == doctest::Approx(0.2));
  CHECK(rep.saidi_mod_minutes() == doctest::Approx(0.2 * 5.0));
  auto j = rep.to_json();
  CHECK(j.at("ri_eps_mod").get<double>() == doctest::Approx(rep.ri_eps_mod));
}
