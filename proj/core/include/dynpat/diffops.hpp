#pragma once

#include <cstdint>
#include <vector>

#include "dynpat/types.hpp"

namespace dynpat {

// Discrete spatial difference operators on an nx*ny frame (row-major,
// index = y*nx + x). Gradient fields are stored component-major: the x and
// y derivative planes are separate nx*ny arrays.

/// Forward differences with replicate (Neumann) boundary: the last
/// difference along each axis is zero.
void grad_fwd(const double* u, int nx, int ny, double* gx, double* gy);

/// Transpose of grad_fwd. The negative of this map is the matching
/// discrete divergence: <grad_fwd u, y> = <u, grad_fwd_adjoint y>.
void grad_fwd_adjoint(const double* gx, const double* gy, int nx, int ny,
                      double* u);

/// Central differences, one-sided at the boundary pixels.
void grad_central(const double* u, int nx, int ny, double* gx, double* gy);

/// Transpose of grad_central.
void grad_central_adjoint(const double* gx, const double* gy, int nx, int ny,
                          double* u);

// Entrywise-absolute-value variants (all stencil coefficients replaced by
// their magnitude). Applying them to an all-ones input yields the row/column
// absolute sums needed by diagonally preconditioned primal-dual steps.
void grad_fwd_abs(const double* u, int nx, int ny, double* gx, double* gy);
void grad_fwd_abs_adjoint(const double* gx, const double* gy, int nx, int ny,
                          double* u);
void grad_central_abs(const double* u, int nx, int ny, double* gx, double* gy);
void grad_central_abs_adjoint(const double* gx, const double* gy, int nx,
                              int ny, double* u);

/// Linearized transport operator for a frozen motion field v: maps an image
/// sequence p to the T-1 residual frames
///   r_t = p_{t+1} - p_t + (grad_central p_t) . v_t .
class TransportOperator {
public:
  explicit TransportOperator(const MotionSeq& v) : v_(&v) {}

  int residual_frames() const { return v_->frames() - 1; }

  /// Residuals, flattened as (T-1) frames of nx*ny values.
  std::vector<double> apply(const ImageSeq& p) const;

  /// Exact transpose: maps T-1 residual frames back to a T-frame sequence.
  ImageSeq adjoint(const std::vector<double>& r) const;

  // |coefficient| variants for row/column sums.
  std::vector<double> apply_abs(const ImageSeq& p) const;
  ImageSeq adjoint_abs(const std::vector<double>& r) const;

private:
  const MotionSeq* v_;
};

/// Pointwise multiply-and-sum against the frozen central gradient of one
/// image frame: maps a motion frame (vx, vy) to the image
///   sum_i v_i . (grad_central p)_i,
/// with the transpose mapping an image back to a motion frame.
class PointwiseFlowOp {
public:
  PointwiseFlowOp(const double* p_frame, int nx, int ny);

  int pixels() const { return static_cast<int>(gx_.size()); }
  const std::vector<double>& gx() const { return gx_; }
  const std::vector<double>& gy() const { return gy_; }

  void apply(const double* vx, const double* vy, double* out) const;
  void adjoint(const double* img, double* vx, double* vy) const;

private:
  std::vector<double> gx_, gy_;
};

/// Power-iteration estimate of the squared spectral norm of the stacked
/// per-component forward-difference gradient (identical blocks for the d=2
/// motion components). The classical bound is 4*d on any grid.
double grad_stack_norm_sq_estimate(int nx, int ny, int iters, std::uint64_t seed);

} // namespace dynpat
