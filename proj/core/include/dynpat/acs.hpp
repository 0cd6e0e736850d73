#pragma once

#include <string>

#include "dynpat/admm.hpp"
#include "dynpat/pdhg.hpp"

namespace dynpat {

enum class SubsolverBackend { Pdhg, Admm };
SubsolverBackend backend_from_string(const std::string& s);

/// Alternate convex search over the bi-convex denoising objective: image and
/// motion blocks are solved in turn by the configured backends. A candidate
/// block update is only accepted if the full objective strictly decreased;
/// otherwise the subsolver budget is doubled (up to budget_doublings times)
/// and on final failure the previous iterate is kept.
struct AcsConfig {
  int alternations = 4;
  int budget_doublings = 3;
  SubsolverBackend backend_p = SubsolverBackend::Admm;
  SubsolverBackend backend_v = SubsolverBackend::Admm;
  PdhgConfig pdhg_p;
  PdhgConfig pdhg_v;
  AdmmConfig admm_p;
  AdmmConfig admm_v;
};

/// Persistent alternation state: accepted iterates, warm-start payloads for
/// every backend, and the energy trace with "p-update"/"v-update" markers
/// for the accepted energies (subsolver stride records interleave).
struct AcsState {
  ImageSeq p;
  MotionSeq v;
  double energy = 0.0; ///< last accepted denoising energy
  int alternation_count = 0;
  EnergyTrace trace;
  PdhgWarmP pdhg_p;
  PdhgWarmV pdhg_v;
  AdmmWarmP admm_p;
  AdmmWarmV admm_v;
};

AcsState make_acs_state(int nx, int ny, int frames);

/// Runs cfg.alternations p/v alternations against the anchor p_tilde using
/// the step-scaled weights of params. The accepted-iterate energy sequence
/// is nonincreasing by construction.
void acs_solve(const ImageSeq& p_tilde, AcsState& state,
               const RegParams& params, const AcsConfig& cfg);

} // namespace dynpat
