#pragma once

#include <string>

#include "dynpat/outer.hpp"

namespace dynpat {

enum class Recipe { Nnls, TvFbf, Tvtvl2 };
Recipe recipe_from_string(const std::string& s);

/// Dispatches to the frame-by-frame baselines or the joint reconstruction.
/// Nnls ignores the regularization weights; TvFbf uses params.alpha only.
ReconResult run_recipe(Recipe recipe, const DataSeq& data,
                       const SamplingSchedule& sched, const WaveOperator& fwd,
                       const RegParams& params, const OuterConfig& cfg);

/// Motion field obtained from a single motion update on known images
/// (default weights beta = 1e-6, gamma = 1). Serves as the reference field
/// when evaluating estimated motion.
MotionSeq reference_flow(const ImageSeq& p_truth, double beta = 1e-6,
                         double gamma = 1.0,
                         SubsolverBackend backend = SubsolverBackend::Admm,
                         int max_iters = 400, int threads = 0);

} // namespace dynpat
