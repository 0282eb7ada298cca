#pragma once

#include <cstddef>
#include <span>

namespace gridres::kernels {

/// Sums needed by every reliability index over a residual trajectory.
struct HingeSums {
  double abs_residual = 0.0;  ///< Σ|R(i)|
  double hinge = 0.0;         ///< Σ max(|R(i)| − εP_g(i), 0)
  double hinge_sq = 0.0;      ///< Σ max(|R(i)| − εP_g(i), 0)²
  double generation = 0.0;    ///< Σ P_g(i)
};

/// Fixed chunk width for the parallel reduction. Partial sums are combined in
/// chunk order, so the parallel result does not depend on the thread count.
inline constexpr std::size_t kChunk = 4096;

/// Straight left-to-right loop; reference for the parallel kernel.
HingeSums hinge_sums_serial(std::span<const double> residual, std::span<const double> p_g, double epsilon);

/// OpenMP reduction over fixed chunks.
HingeSums hinge_sums_parallel(std::span<const double> residual, std::span<const double> p_g, double epsilon);

/// Dispatches to the parallel kernel above a size threshold.
HingeSums hinge_sums(std::span<const double> residual, std::span<const double> p_g, double epsilon);

}  // namespace gridres::kernels
