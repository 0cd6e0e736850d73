#pragma once

#include "dynpat/sampling.hpp"
#include "dynpat/types.hpp"
#include "dynpat/wave.hpp"

namespace dynpat {

/// Isotropic total variation of one frame: sum over pixels of the l2 norm
/// of the forward-difference gradient.
double tv_iso(const double* u, int nx, int ny);

/// Sum of squared optical-flow residuals p_{t+1} - p_t + (grad p_t).v_t
/// over the T-1 transported frames.
double flow_misfit_sq(const ImageSeq& p, const MotionSeq& v);

/// Objective of the step-scaled denoising problem:
///   sum_t  |p_t - pt_t|^2/2 + eta*alpha TV(p_t)
///        + eta*beta sum_i TV(v_i,t) + eta*gamma/2 |transport residual|^2.
double denoising_energy(const ImageSeq& p, const MotionSeq& v,
                        const ImageSeq& p_tilde, const RegParams& params);

/// Full variational objective with the acoustic data term
///   sum_t |C_t A p_t - f_t|^2/2 + alpha TV(p_t) + beta sum_i TV(v_i,t)
///        + gamma/2 |transport residual|^2.
double total_energy(const ImageSeq& p, const MotionSeq& v, const DataSeq& data,
                    const SamplingSchedule& sched, const RegParams& params,
                    const WaveOperator& fwd, int threads = 0);

// Subproblem objectives used by the convex solvers and their monotonicity
// guards.

/// sum_t |p_t - pt_t|^2/2 + alpha_t TV(p_t) + gamma_t/2 |transport|^2
/// (motion frozen).
double p_subproblem_energy(const ImageSeq& p, const ImageSeq& p_tilde,
                           const MotionSeq& v, double alpha_t, double gamma_t);

/// Per-frame motion objective
///   beta_t (TV(vx) + TV(vy)) + gamma_t/2 |rho + gx.vx + gy.vy|^2
/// where rho = p_{t+1} - p_t and (gx, gy) is the central gradient of p_t.
double v_frame_energy(const double* vx, const double* vy, const double* rho,
                      const double* gx, const double* gy, int nx, int ny,
                      double beta_t, double gamma_t);

/// Sum of v_frame_energy over the T-1 active motion frames.
double v_subproblem_energy(const MotionSeq& v, const ImageSeq& p,
                           double beta_t, double gamma_t);

} // namespace dynpat
