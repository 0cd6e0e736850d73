#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dynpat/sampling.hpp"
#include "dynpat/types.hpp"

namespace dynpat {

/// Discrete 2D photoacoustic forward operator: propagates an initial
/// pressure image through the homogeneous wave equation with a spectral
/// (exact-dispersion k-space) time stepper and records the field at a set
/// of boundary sensor pixels for n_tau steps. The grid is zero-padded by
/// damping_width on every side and a multiplicative exponential sponge is
/// applied in the pad band each step to suppress periodic wrap-around.
///
/// adjoint() is the exact algebraic transpose of the damped discrete
/// forward map, implemented by running the recurrence in reverse with
/// time-reversed sensor injection.
///
/// Construct operators from a single thread (FFTW planning is not
/// thread-safe); forward/adjoint calls are pure and may run concurrently.
class WaveOperator {
public:
  WaveOperator(const Grid2D& grid, std::vector<int> sensor_pixels);
  ~WaveOperator();

  WaveOperator(const WaveOperator&) = delete;
  WaveOperator& operator=(const WaveOperator&) = delete;
  WaveOperator(WaveOperator&&) noexcept;
  WaveOperator& operator=(WaveOperator&&) noexcept;

  const Grid2D& grid() const;
  int sensor_count() const;
  int n_tau() const;
  const std::vector<int>& sensor_pixels() const;

  /// p0 (nx*ny) -> sensor data, M x n_tau row-major.
  std::vector<double> forward(std::span<const double> p0) const;

  /// data (M x n_tau) -> image (nx*ny); exact transpose of forward().
  std::vector<double> adjoint(std::span<const double> data) const;

  /// l2 norm of the padded field after each step (diagnostic; the damped
  /// scheme must not blow up under a CFL-respecting configuration).
  std::vector<double> step_norms(std::span<const double> p0) const;

  /// Power-iteration estimate of the largest eigenvalue of A* C_t* C_t A
  /// for frame t of the given schedule (the Lipschitz constant of the
  /// per-frame data term gradient).
  double estimate_lipschitz(const SamplingSchedule& sched, int t, int iters,
                            std::uint64_t seed) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Default measurement geometry: sensors on the two orthogonal boundary
/// lines, nx/2 evenly spaced on the top edge (odd x, y=0) followed by ny/2
/// on the left edge (x=0, odd y).
std::vector<int> two_edge_sensors(const Grid2D& grid);

} // namespace dynpat
