#include <doctest.h>

#include "gridres/error.hpp"
#include "gridres/myopic.hpp"
#include "gridres/opt_convex.hpp"
#include "support/instances.hpp"
#include "support/reference.hpp"

using namespace gridres;

namespace {

BatterySpec unit_battery(double energy = 100) { return BatterySpec::from_c_rating(energy, 1, 1); }

}  // namespace

TEST_CASE("program size follows the closed form") {
  auto series = ImbalanceSeries::constant_generation({10, -20, 5, 0, 7}, 1000, 1.0);
  for (auto v : kAllVariants) {
    auto p = make_problem(v, series, unit_battery(), 0.01, 50);
    auto prog = convex::build(p);
    auto got = prog.counts();
    auto want = convex::expected_counts(5, p.soc_penalty.has_value());
    CHECK(got.variables == want.variables);
    CHECK(got.equalities == want.equalities);
    CHECK(got.inequalities == want.inequalities);
    CHECK(got.bounds == want.bounds);
    CHECK(got.variables == (p.soc_penalty ? 25 : 20));
  }
}

TEST_CASE("zero imbalance gives zero dispatch") {
  auto series = ImbalanceSeries::constant_generation(std::vector<double>(6, 0.0), 1000, 1.0);
  for (auto v : {Variant::Linear, Variant::Quadratic, Variant::LinearResponse, Variant::QuadraticResponse}) {
    auto r = convex::optimize(make_problem(v, series, unit_battery(), 0.01, 30));
    CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-9));
    for (double s : r.s) CHECK(std::abs(s) < 1e-6);
  }
  // With a SoC penalty and the battery below the band it drifts up.
  auto r = convex::optimize(make_problem(Variant::LinearResponseSoc, series, unit_battery(), 0.01, 10, 5.0));
  CHECK(r.b.back() > 10.0);
}

TEST_CASE("perfect tracking when the battery can absorb everything") {
  auto series = ImbalanceSeries::constant_generation({30, -20, 10, -40}, 1000, 1.0);
  auto r = convex::optimize(make_problem(Variant::QuadraticResponse, series, unit_battery(), 0.005, 50));
  CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.complementarity_violations == 0);
}

TEST_CASE("linear optimum equals alg1 under unit efficiency") {
  testing::InstanceGenerator gen(21);
  for (int t = 0; t < 40; ++t) {
    auto p = gen.problem(Variant::Linear, {3, 10, true});
    auto c = convex::optimize(p);
    auto a = myopic::run_policy(myopic::Policy::Alg1, p.battery, std::nullopt, p.series, 0.0, p.b0);
    CHECK(c.objective == doctest::Approx(a.objective).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("solution audit") {
  testing::InstanceGenerator gen(4);
  for (int t = 0; t < 30; ++t) {
    for (auto v : kAllVariants) {
      auto p = gen.problem(v, {2, 12, false});
      auto r = convex::optimize(p);
      CHECK(reference::infeasibility(p, r) <= 1e-8);
      CHECK(r.objective == doctest::Approx(reference::objective(p, r.s, r.b)).epsilon(1e-8));
      if (!p.soc_penalty && p.battery.eta_ch == 1.0 && p.battery.eta_dis == 1.0) CHECK(r.complementarity_violations == 0);
    }
  }
}

TEST_CASE("bigger battery never costs more") {
  testing::InstanceGenerator gen(8);
  for (int t = 0; t < 20; ++t) {
    for (auto v : {Variant::LinearResponse, Variant::Quadratic}) {
      auto p = gen.problem(v, {4, 12, false});
      auto r1 = convex::optimize(p);
      auto q = p;
      q.battery.b_rated *= 1.5;
      q.battery.b_max = q.battery.b_max + 0.5 * p.battery.b_rated;
      q.battery.delta_max *= 1.3;
      q.battery.delta_min *= 1.3;
      auto r2 = convex::optimize(q);
      // Only exact when the relaxation is tight; compare only then.
      if (r1.complementarity_violations == 0 && r2.complementarity_violations == 0)
        CHECK(r2.objective <= r1.objective + 1e-7 * std::max(1.0, r1.objective));
    }
  }
}

TEST_CASE("errors") {
  auto series = ImbalanceSeries::constant_generation({50, -50, 80}, 1000, 1.0);
  auto p = make_problem(Variant::Quadratic, series, unit_battery(), 0.0, 50);
  convex::Options opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS(convex::optimize(p, opt), NonConvergence);
  p.b0 = 150;
  CHECK_THROWS_AS(convex::optimize(p), Infeasible);
}
