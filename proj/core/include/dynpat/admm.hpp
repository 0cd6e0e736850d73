#pragma once

#include <vector>

#include "dynpat/linsolve.hpp"
#include "dynpat/types.hpp"

namespace dynpat {

/// ADMM (split-Bregman form) configuration for both subproblems. The image
/// update solves its normal equations matrix-free with warm-started CG; the
/// motion update assembles one sparse SPD system per frame and solves it
/// with the configured Krylov method and preconditioner. The inner solves
/// run at least min_inner_iters iterations and stop at relative residual
/// inner_tol_scale / k^{3/2} at outer iteration k.
struct AdmmConfig {
  enum class RhoMode { AdaptiveThenFixed, Fixed };

  double rho = 1.0;     ///< initial penalty for the image update
  RhoMode rho_mode = RhoMode::AdaptiveThenFixed;
  int adapt_until = 25; ///< residual-balancing active for k <= this
  double over_relax = 1.8;
  KrylovMethod solver = KrylovMethod::CG;
  Precond precond = Precond::IC0;
  double inner_tol_scale = 1e-3;
  int min_inner_iters = 3;
  int max_inner_iters = 200;
  int max_iters = 60;
  int energy_stride = 5;
  int threads = 0;
  double divergence_factor = 1e3;
  double rho_v = 0.1;     ///< fixed penalty of the motion update (d = 2)
  double spd_shift = 0.0; ///< optional identity shift of the motion system
};

struct AdmmWarmP {
  bool valid = false;
  ImageSeq x;
  std::vector<double> y1, w1; ///< gradient block, 2*N per frame
  std::vector<double> y2, w2; ///< nonnegativity block, N per frame
  double rho = 0.0;
};

struct AdmmWarmV {
  bool valid = false;
  MotionSeq x;
  std::vector<double> y, w; ///< Jacobian block, 4*N per active frame
};

/// Final split residuals of an ADMM run (primal |Kx - y|, dual
/// rho |K^T (y - y_prev)|), for convergence diagnostics.
struct AdmmReport {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

/// gamma_t * E^T E + rho * blockdiag(Lap, Lap) (+ shift * I) for one image
/// frame, where E is the pointwise flow operator of the frame's central
/// gradient and Lap the forward-difference Laplacian. This is the constant
/// system matrix of the per-frame motion update.
SparseSpdSystem assemble_flow_system(const double* p_frame, int nx, int ny,
                                     double gamma_t, double rho,
                                     double shift = 0.0);

/// ADMM on the image subproblem (split y = [grad p; p]). Returns the best
/// feasible iterate seen at the energy stride; `reference` (default: the
/// projected warm start) seeds the best-so-far tracking so a warm-started
/// call can never return something worse than the accepted outer iterate.
ImageSeq admm_solve_p(const ImageSeq& p_tilde, const MotionSeq& v,
                      double alpha_t, double gamma_t, const AdmmConfig& cfg,
                      AdmmWarmP* warm = nullptr,
                      const ImageSeq* reference = nullptr,
                      EnergyTrace* trace = nullptr,
                      AdmmReport* report = nullptr);

/// Frame-parallel ADMM on the motion subproblem (Jacobian split).
MotionSeq admm_solve_v(const ImageSeq& p, const MotionSeq& v_init,
                       double beta_t, double gamma_t, const AdmmConfig& cfg,
                       AdmmWarmV* warm = nullptr, EnergyTrace* trace = nullptr);

} // namespace dynpat
