#include <doctest.h>

#include <random>

#include "gridres/qp.hpp"

using namespace gridres;

TEST_CASE("qp: box constrained quadratic") {
  // min (x-3)^2 + (y+1)^2, 0 <= x <= 2, y >= 0 -> (2, 0)
  qp::Builder B;
  int x = B.add_variable(0, 2);
  int y = B.add_variable(0, qp::kInf);
  B.add_square({{x, 1.0}}, 1.0);
  B.add_square({{y, 1.0}}, 1.0);
  B.add_cost(x, -6.0);
  B.add_cost(y, 2.0);
  B.add_constant(10.0);
  auto p = B.build();
  auto sol = qp::solve(p);
  REQUIRE(qp::usable(sol.status));
  CHECK(sol.x[x] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.x[y] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.0 + 1.0).epsilon(1e-7));
}

TEST_CASE("qp: small lp with equality") {
  // min -x - 2y  s.t. x + y = 4, x - y <= 1, x,y in [0, 3]
  qp::Builder B;
  int x = B.add_variable(0, 3, -1);
  int y = B.add_variable(0, 3, -2);
  B.add_equality({{x, 1}, {y, 1}}, 4);
  B.add_inequality({{x, 1}, {y, -1}}, 1);
  auto sol = qp::solve(B.build());
  REQUIRE(sol.status == qp::Status::Solved);
  CHECK(sol.x[x] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x[y] == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("qp: pinned variable") {
  qp::Builder B;
  int x = B.add_variable(1.5, 1.5, 1.0);
  int y = B.add_variable(-qp::kInf, qp::kInf);
  B.add_square({{x, 1}, {y, -1}});
  auto sol = qp::solve(B.build());
  REQUIRE(qp::usable(sol.status));
  CHECK(sol.x[x] == doctest::Approx(1.5));
  CHECK(sol.x[y] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("qp: random projections onto a box match clamping") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 30; ++t) {
    qp::Builder B;
    std::vector<double> target(6), lo(6), hi(6);
    for (int i = 0; i < 6; ++i) {
      target[i] = u(rng);
      lo[i] = u(rng);
      hi[i] = lo[i] + std::abs(u(rng)) + 0.1;
      int v = B.add_variable(lo[i], hi[i], -2 * target[i]);
      B.add_square({{v, 1.0}});
    }
    auto sol = qp::solve(B.build());
    REQUIRE(qp::usable(sol.status));
    for (int i = 0; i < 6; ++i) CHECK(sol.x[i] == doctest::Approx(std::clamp(target[i], lo[i], hi[i])).epsilon(1e-6));
  }
}

TEST_CASE("qp: infeasible problem is not reported as solved") {
  qp::Builder B;
  int x = B.add_variable(0, 1, 1);
  B.add_equality({{x, 1}}, 5);
  qp::Settings s;
  s.max_iterations = 60;
  auto sol = qp::solve(B.build(), s);
  CHECK_FALSE(qp::usable(sol.status));
}
