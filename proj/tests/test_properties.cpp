#include <doctest.h>

#include "support/properties.hpp"

using namespace gridres;

namespace {

void expect(const properties::Outcome& o, int min_cases) {
  INFO(o.name << ": " << o.first_failure);
  CHECK(o.cases >= min_cases);
  CHECK(o.failures == 0);
}

}  // namespace

TEST_CASE("metrics are monotone in epsilon") { expect(properties::metrics_monotone_in_epsilon(1000, 1), 1000); }

TEST_CASE("battery bookkeeping round-trips") { expect(properties::battery_round_trip(1000, 2), 1000); }

TEST_CASE("alg2 with a zero band is alg1") { expect(properties::alg2_zero_band_is_alg1(1000, 3), 1000); }

TEST_CASE("alg3 never leaves the SoC band through replenishment") {
  expect(properties::alg3_band_respected(1000, 4), 1000);
}

TEST_CASE("every solver output is feasible") { expect(properties::dispatch_feasibility(1000, 5), 1000); }
