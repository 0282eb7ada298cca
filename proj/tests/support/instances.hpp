#pragma once

// Random small problems shared by the test suites.

#include <cstdint>
#include <random>

#include "gridres/problem.hpp"

namespace gridres::testing {

struct InstanceShape {
  std::size_t n_min = 1;
  std::size_t n_max = 4;
  bool unit_efficiency = false;
};

class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  BatterySpec battery(double h, bool unit_efficiency) {
    BatterySpec b;
    b.b_rated = uniform(10.0, 100.0);
    b.b_min = coin(0.5) ? 0.0 : uniform(0.0, 0.2) * b.b_rated;
    b.b_max = coin(0.5) ? b.b_rated : uniform(0.7, 1.0) * b.b_rated;
    b.delta_max = uniform(0.1, 0.8) * b.b_rated / h;
    b.delta_min = -uniform(0.1, 0.8) * b.b_rated / h;
    b.eta_ch = unit_efficiency ? 1.0 : uniform(0.8, 1.0);
    b.eta_dis = unit_efficiency ? 1.0 : uniform(0.8, 1.0);
    return b;
  }

  ProblemSpec problem(Variant v, const InstanceShape& shape = {}) {
    const std::size_t n = index(shape.n_min, shape.n_max);
    const double h = coin(0.7) ? 1.0 : 0.25;
    BatterySpec bat = battery(h, shape.unit_efficiency);
    const double pg = uniform(500.0, 2000.0);
    std::vector<double> delta(n);
    for (auto& d : delta) d = coin(0.1) ? 0.0 : uniform(-0.6, 0.6) * bat.b_rated / h;
    // Band half-width up to ~0.3 of the rated energy per step.
    const double eps = coin(0.2) ? 0.0 : uniform(0.0, 0.3) * bat.b_rated / (pg * h);
    const double b0 = coin(0.2) ? (coin() ? bat.b_min : bat.b_max) : uniform(bat.b_min, bat.b_max);
    const double lo = uniform(0.1, 0.5);
    const SocBand band(lo, std::min(1.0, lo + uniform(0.1, 0.4)));
    const double lambda = uniform(0.0, 2.0) * bat.b_rated;
    auto series = ImbalanceSeries::constant_generation(std::move(delta), pg, h);
    return make_problem(v, std::move(series), bat, eps, b0, lambda, band);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace gridres::testing
