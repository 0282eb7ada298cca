#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gridres/kernels.hpp"
#include "gridres/oracle.hpp"

using namespace gridres;

namespace {

struct Series {
  std::vector<double> r, pg;
};

Series make_series(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0, 200);
  Series s{std::vector<double>(n), std::vector<double>(n, 10000.0)};
  for (auto& x : s.r) x = noise(rng);
  return s;
}

ProblemSpec oracle_problem(std::size_t n) {
  auto bat = BatterySpec::from_c_rating(100, 1, 1, 0.95, 0.95);
  std::vector<double> delta = {60, -40, 25, -70};
  delta.resize(n);
  return make_problem(Variant::QuadraticResponse, ImbalanceSeries::constant_generation(delta, 2000, 1.0), bat, 0.01,
                      50);
}

void BM_HingeSerial(benchmark::State& state) {
  auto s = make_series(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::hinge_sums_serial(s.r, s.pg, 0.01));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HingeParallel(benchmark::State& state) {
  auto s = make_series(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::hinge_sums_parallel(s.r, s.pg, 0.01));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OracleSerial(benchmark::State& state) {
  auto p = oracle_problem(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(oracle::brute_force_serial(p).objective);
}

void BM_OracleParallel(benchmark::State& state) {
  auto p = oracle_problem(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(oracle::brute_force(p).objective);
}

}  // namespace

BENCHMARK(BM_HingeSerial)->RangeMultiplier(8)->Range(1 << 12, 1 << 21);
BENCHMARK(BM_HingeParallel)->RangeMultiplier(8)->Range(1 << 12, 1 << 21);
BENCHMARK(BM_OracleSerial)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
