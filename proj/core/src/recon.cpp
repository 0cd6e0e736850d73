#include "dynpat/recon.hpp"

#include <stdexcept>

namespace dynpat {

Recipe recipe_from_string(const std::string& s) {
  if (s == "nnls") return Recipe::Nnls;
  if (s == "tv_fbf") return Recipe::TvFbf;
  if (s == "tvtvl2") return Recipe::Tvtvl2;
  throw std::invalid_argument("unknown recipe: " + s);
}

ReconResult run_recipe(Recipe recipe, const DataSeq& data,
                       const SamplingSchedule& sched, const WaveOperator& fwd,
                       const RegParams& params, const OuterConfig& cfg) {
  switch (recipe) {
    case Recipe::Nnls:
      return fbf_reconstruct(data, sched, fwd, 0.0, FbfMode::Nnls, cfg);
    case Recipe::TvFbf:
      return fbf_reconstruct(data, sched, fwd, params.alpha, FbfMode::Tv, cfg);
    case Recipe::Tvtvl2:
      return fista_reconstruct(data, sched, fwd, params, cfg);
  }
  throw std::invalid_argument("run_recipe: unknown recipe");
}

MotionSeq reference_flow(const ImageSeq& p_truth, double beta, double gamma,
                         SubsolverBackend backend, int max_iters, int threads) {
  MotionSeq v0(p_truth.nx(), p_truth.ny(), p_truth.frames());
  if (backend == SubsolverBackend::Pdhg) {
    PdhgConfig cfg;
    cfg.max_iters = max_iters;
    cfg.threads = threads;
    return pdhg_solve_v(p_truth, v0, beta, gamma, cfg);
  }
  AdmmConfig cfg;
  cfg.max_iters = max_iters;
  cfg.threads = threads;
  return admm_solve_v(p_truth, v0, beta, gamma, cfg);
}

} // namespace dynpat
