#pragma once

#include <cstdint>
#include <vector>

#include "dynpat/acs.hpp"
#include "dynpat/sampling.hpp"
#include "dynpat/types.hpp"
#include "dynpat/wave.hpp"

namespace dynpat {

/// Accelerated proximal gradient (FISTA) configuration. The gradient step
/// size is step_scale / max_t L_t with the per-frame Lipschitz constants
/// estimated once per schedule by power iteration (or passed in).
struct OuterConfig {
  int iterations = 20;
  double step_scale = 1.5;
  int lipschitz_iters = 20;
  std::uint64_t seed = 0;
  int threads = 0;
  AcsConfig acs;
  std::vector<double> lipschitz; ///< optional: per-period L_t, skips estimation
};

struct ReconResult {
  ImageSeq p;
  MotionSeq v;
  EnergyTrace trace;     ///< accepted total energies per outer iteration
  EnergyTrace acs_trace; ///< proximal-subproblem energies (block markers)
  std::vector<double> lipschitz;
  double eta = 0.0;
};

/// Joint reconstruction: forward-backward splitting with FISTA extrapolation
/// around the acoustic data term; the backward (proximal) step is the
/// TV/TV/flow-regularized denoising problem solved by alternate convex
/// search. Momentum restarts whenever the total energy would increase, so
/// the recorded energy sequence is nonincreasing.
ReconResult fista_reconstruct(const DataSeq& data,
                              const SamplingSchedule& sched,
                              const WaveOperator& fwd, const RegParams& params,
                              const OuterConfig& cfg);

enum class FbfMode { Nnls, Tv };

/// Frame-by-frame baseline: the same outer loop with the motion model
/// disabled (beta = gamma = 0) and either a plain nonnegative projection
/// (Nnls) or a nonnegative TV denoising prox (Tv).
ReconResult fbf_reconstruct(const DataSeq& data, const SamplingSchedule& sched,
                            const WaveOperator& fwd, double alpha, FbfMode mode,
                            const OuterConfig& cfg);

} // namespace dynpat
