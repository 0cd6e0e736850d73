#pragma once

#include <vector>

#include "dynpat/types.hpp"

namespace dynpat {

/// First-order primal-dual (Chambolle-Pock) configuration. In Fixed mode the
/// scalar steps must satisfy mu*nu*|K|^2 <= 1, which is checked against a
/// power-iteration estimate of the operator norm; DiagPrecond uses per-
/// coordinate steps from the absolute row/column sums of K (Pock & Chambolle
/// diagonal preconditioning with exponent 1).
struct PdhgConfig {
  enum class StepMode { Fixed, DiagPrecond };

  double theta = 1.0; ///< over-relaxation of the primal iterate, in [0,1]
  StepMode mode = StepMode::DiagPrecond;
  double mu = 0.0; ///< primal step (Fixed mode); 0 picks a safe default
  double nu = 0.0; ///< dual step (Fixed mode); 0 picks a safe default
  int max_iters = 400;
  int energy_stride = 10;
  int threads = 0; ///< frame parallelism of the motion update
  double divergence_factor = 1e3;
  int norm_check_iters = 30;
};

/// Persistent primal/dual state for warm-started image updates.
struct PdhgWarmP {
  bool valid = false;
  ImageSeq x;
  std::vector<double> y_tv; ///< 2*N per frame (gradient dual)
  std::vector<double> y_tr; ///< N per transported frame (flow dual)
};

/// Persistent state for warm-started motion updates.
struct PdhgWarmV {
  bool valid = false;
  MotionSeq x;
  std::vector<double> y; ///< 4*N per active frame (Jacobian dual)
};

/// Approximately minimizes, over p >= 0 with the motion field frozen,
///   sum_t |p_t - pt_t|^2/2 + alpha_t TV(p_t) + gamma_t/2 |transport|^2.
/// Returns the best iterate seen at the energy-check stride; the warm state
/// keeps the raw final iterate for continuation.
ImageSeq pdhg_solve_p(const ImageSeq& p_tilde, const MotionSeq& v,
                      double alpha_t, double gamma_t, const PdhgConfig& cfg,
                      PdhgWarmP* warm = nullptr, EnergyTrace* trace = nullptr);

/// Approximately minimizes, frame by frame with the images frozen,
///   beta_t sum_i TV(v_i,t) + gamma_t/2 |rho_t + (grad p_t).v_t|^2.
/// The final frame stays pinned to zero.
MotionSeq pdhg_solve_v(const ImageSeq& p, const MotionSeq& v_init,
                       double beta_t, double gamma_t, const PdhgConfig& cfg,
                       PdhgWarmV* warm = nullptr, EnergyTrace* trace = nullptr);

} // namespace dynpat
