#include <doctest.h>

#include <random>
#include <sstream>

#include "gridres/error.hpp"
#include "gridres/timeseries.hpp"

using namespace gridres;

namespace {

ImbalanceSeries parse(const std::string& text, CsvSchema schema = {}) {
  std::istringstream in(text);
  return read_csv(in, schema);
}

}  // namespace

TEST_CASE("csv: three rows at five minutes") {
  auto s = parse("time,delta,p_g\n2019-05-10 00:00,10,1000\n2019-05-10 00:05,-5,1000\n2019-05-10 00:10,0,1000\n");
  CHECK(s.size() == 3);
  CHECK(s.step_h == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(s.delta == std::vector<double>{10, -5, 0});
  CHECK(s.p_g == std::vector<double>{1000, 1000, 1000});
  REQUIRE(s.start_time);
  CHECK(format_timestamp(*s.start_time) == "2019-05-10 00:00:00");
}

TEST_CASE("csv: irregular spacing without a step is an error") {
  const std::string text = "time,delta,p_g\n2019-05-10 00:00,1,10\n2019-05-10 00:05,1,10\n2019-05-10 00:15,1,10\n";
  CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("irregular spacing"), InputError);
  CsvSchema schema;
  schema.step_h = 1.0 / 12.0;
  CHECK_NOTHROW(parse(text, schema));
}

TEST_CASE("csv: schema errors") {
  CHECK_THROWS_AS(parse("time,x,p_g\n0,1,1\n"), InputError);
  CHECK_THROWS_AS(parse("time,delta,p_g\n2019-05-10 00:05,1,1\n2019-05-10 00:00,1,1\n"), InputError);
  CHECK_THROWS_AS(parse("time,delta,p_g\n2019-05-10 00:00,1,-1\n2019-05-10 00:05,1,1\n"), InputError);
  CHECK_THROWS_AS(parse("time,delta,p_g\n"), InputError);
}

TEST_CASE("csv: custom columns, constant generation and negation") {
  CsvSchema schema;
  schema.col_delta = "imb";
  schema.col_time = "ts";
  schema.constant_pg = 500.0;
  schema.negate_delta = true;
  auto s = parse("ts,imb\n0,3\n3600,-4\n", schema);
  CHECK(s.step_h == doctest::Approx(1.0));
  CHECK(s.delta == std::vector<double>{-3, 4});
  CHECK(s.p_g == std::vector<double>{500, 500});
}

TEST_CASE("csv: gap filling interpolates and is recorded") {
  CsvSchema schema;
  schema.fill_gaps = true;
  auto s = parse("time,delta,p_g\n0,0,10\n300,,10\n600,4,10\n1200,8,10\n", schema);
  REQUIRE(s.size() == 5);
  CHECK(s.delta[1] == doctest::Approx(2.0));
  CHECK(s.delta[3] == doctest::Approx(6.0));
  CHECK_FALSE(s.provenance.empty());
}

TEST_CASE("csv: write then read is bit exact") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  std::vector<double> d(200), g(200);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = u(rng) / 3.0;
    g[i] = std::abs(u(rng)) + 1.0 / 7.0;
  }
  auto s = ImbalanceSeries::make(d, g, 1.0 / 12.0, parse_timestamp("2019-05-10 00:00"));
  std::stringstream buf;
  write_csv(buf, s);
  auto back = read_csv(buf, {});
  CHECK(back.delta == s.delta);
  CHECK(back.p_g == s.p_g);
  CHECK(back.step_h == doctest::Approx(s.step_h).epsilon(1e-12));
}

TEST_CASE("resample") {
  auto s = ImbalanceSeries::make({2, 4, 6, 8}, {1, 1, 1, 1}, 0.25);
  CHECK(resample(s, 0.5).delta == std::vector<double>{3, 7});
  CHECK(resample(s, 0.5).step_h == doctest::Approx(0.5));
  auto three = resample(s, 0.75);
  CHECK(three.delta == std::vector<double>{4});
  auto same = resample(s, 0.25);
  CHECK(same.delta == s.delta);
  CHECK(same.p_g == s.p_g);
  CHECK_THROWS_AS(resample(s, 0.6), InputError);
}

TEST_CASE("resample composes") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-100, 100);
  std::vector<double> d(120);
  for (auto& v : d) v = u(rng);
  auto s = ImbalanceSeries::constant_generation(d, 1000.0, 1.0);
  auto twice = resample(resample(s, 2.0), 6.0);
  auto once = resample(s, 6.0);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice.delta[i] == doctest::Approx(once.delta[i]).epsilon(1e-12));
}

TEST_CASE("synth") {
  SynthModel m;
  m.volatility = 0.0;
  m.mean_mw = 0.0;
  auto zero = synth(100, m, 1);
  for (double v : zero.delta) CHECK(v == 0.0);

  SynthModel noisy;
  auto a = synth(500, noisy, 42);
  auto b = synth(500, noisy, 42);
  CHECK(a.delta == b.delta);
  CHECK(a.p_g == b.p_g);
  CHECK(synth(500, noisy, 43).delta != a.delta);

  SynthModel spiked = noisy;
  spiked.step_h = 1.0 / 60.0;
  SynthModel plain = spiked;
  spiked.spikes.push_back({253, -2000.0});
  auto with = synth(44640, spiked, 7);
  auto without = synth(44640, plain, 7);
  CHECK(with.delta[253] - without.delta[253] == doctest::Approx(-2000.0).epsilon(1e-12));
  CHECK(with.delta[252] == without.delta[252]);
  CHECK(with.delta[254] == without.delta[254]);

  SynthModel bad;
  bad.volatility = -1.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = SynthModel{};
  bad.generation.base_mw = 0.0;
  CHECK_THROWS_AS(synth(10, bad, 0), InputError);
}

TEST_CASE("synth model from json") {
  auto m = SynthModel::from_json(nlohmann::json::parse(
      R"({"step_h": 0.25, "volatility": 10, "generation": {"kind": "sinusoidal", "base_mw": 8000, "amplitude_mw": 500},
          "spikes": [{"index": 3, "magnitude_mw": -100}]})"));
  CHECK(m.step_h == 0.25);
  CHECK(m.generation.kind == GenerationProfile::Kind::Sinusoidal);
  REQUIRE(m.spikes.size() == 1);
  CHECK(m.spikes[0].index == 3);
  auto s = synth(96, m, 1);
  s.validate();
  CHECK(*std::max_element(s.p_g.begin(), s.p_g.end()) > 8000.0);
}

TEST_CASE("series invariants") {
  CHECK_THROWS_AS(ImbalanceSeries::make({1, 2}, {1}, 1.0), InputError);
  CHECK_THROWS_AS(ImbalanceSeries::make({}, {}, 1.0), InputError);
  CHECK_THROWS_AS(ImbalanceSeries::make({1}, {1}, 0.0), InputError);
  CHECK_THROWS_AS(ImbalanceSeries::make({1}, {-1}, 1.0), InputError);
}
