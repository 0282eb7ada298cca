#include "gridres/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gridres::kernels {

namespace {

void accumulate(HingeSums& acc, double r, double pg, double epsilon) {
  double a = std::abs(r);
  double over = std::max(a - epsilon * pg, 0.0);
  acc.abs_residual += a;
  acc.hinge += over;
  acc.hinge_sq += over * over;
  acc.generation += pg;
}

}  // namespace

HingeSums hinge_sums_serial(std::span<const double> residual, std::span<const double> p_g, double epsilon) {
  HingeSums acc;
  for (std::size_t i = 0; i < residual.size(); ++i) accumulate(acc, residual[i], p_g[i], epsilon);
  return acc;
}

HingeSums hinge_sums_parallel(std::span<const double> residual, std::span<const double> p_g, double epsilon) {
  const std::size_t n = residual.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<HingeSums> partial(chunks);
  const double* r = residual.data();
  const double* pg = p_g.data();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(chunks); ++c) {
    HingeSums acc;
    std::size_t end = std::min(n, std::size_t(c + 1) * kChunk);
    for (std::size_t i = std::size_t(c) * kChunk; i < end; ++i) accumulate(acc, r[i], pg[i], epsilon);
    partial[std::size_t(c)] = acc;
  }

  HingeSums total;
  for (const auto& p : partial) {
    total.abs_residual += p.abs_residual;
    total.hinge += p.hinge;
    total.hinge_sq += p.hinge_sq;
    total.generation += p.generation;
  }
  return total;
}

HingeSums hinge_sums(std::span<const double> residual, std::span<const double> p_g, double epsilon) {
  return residual.size() > 4 * kChunk ? hinge_sums_parallel(residual, p_g, epsilon)
                                      : hinge_sums_serial(residual, p_g, epsilon);
}

}  // namespace gridres::kernels
