#include "dynpat/acs.hpp"

#include <cmath>
#include <stdexcept>

#include "dynpat/energy.hpp"

namespace dynpat {

SubsolverBackend backend_from_string(const std::string& s) {
  if (s == "pdhg") return SubsolverBackend::Pdhg;
  if (s == "admm") return SubsolverBackend::Admm;
  throw std::invalid_argument("unknown backend: " + s);
}

AcsState make_acs_state(int nx, int ny, int frames) {
  AcsState state;
  state.p = ImageSeq(nx, ny, frames);
  state.v = MotionSeq(nx, ny, frames);
  return state;
}

namespace {

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b));
}

} // namespace

void acs_solve(const ImageSeq& p_tilde, AcsState& state,
               const RegParams& params, const AcsConfig& cfg) {
  if (!p_tilde.same_shape(state.p))
    throw std::invalid_argument("acs_solve: anchor shape mismatch");
  if (cfg.alternations < 1)
    throw std::invalid_argument("acs_solve: alternations must be >= 1");

  const double at = params.alpha_tilde();
  const double bt = params.beta_tilde();
  const double gt = params.gamma_tilde();
  const bool solve_v = gt > 0.0 && p_tilde.frames() > 1;

  double e_cur = denoising_energy(state.p, state.v, p_tilde, params);
  state.trace.add("acs-init", e_cur);

  for (int j = 0; j < cfg.alternations; ++j) {
    // image block
    {
      int budget = cfg.backend_p == SubsolverBackend::Pdhg
                       ? cfg.pdhg_p.max_iters
                       : cfg.admm_p.max_iters;
      for (int attempt = 0; attempt <= cfg.budget_doublings; ++attempt) {
        ImageSeq candidate;
        if (cfg.backend_p == SubsolverBackend::Pdhg) {
          PdhgConfig sub = cfg.pdhg_p;
          sub.max_iters = budget;
          if (!state.pdhg_p.valid) {
            state.pdhg_p.valid = true;
            state.pdhg_p.y_tv.assign(
                2 * static_cast<std::size_t>(state.p.pixels()) * state.p.frames(),
                0.0);
            state.pdhg_p.y_tr.assign(static_cast<std::size_t>(state.p.pixels()) *
                                         (state.p.frames() - 1),
                                     0.0);
          }
          // primal continuation starts from the accepted iterate
          state.pdhg_p.x = state.p;
          candidate =
              pdhg_solve_p(p_tilde, state.v, at, gt, sub, &state.pdhg_p,
                           &state.trace);
        } else {
          AdmmConfig sub = cfg.admm_p;
          sub.max_iters = budget;
          candidate = admm_solve_p(p_tilde, state.v, at, gt, sub, &state.admm_p,
                                   &state.p, &state.trace);
        }
        const double e_cand =
            denoising_energy(candidate, state.v, p_tilde, params);
        if (e_cand < e_cur && !nearly_equal(e_cand, e_cur)) {
          state.p = std::move(candidate);
          e_cur = e_cand;
          break;
        }
        if (nearly_equal(e_cand, e_cur)) break; // block converged, keep iterate
        budget *= 2;
      }
      state.trace.add("p-update", e_cur);
    }

    // motion block (decoupled and therefore skipped when gamma vanishes)
    if (solve_v) {
      int budget = cfg.backend_v == SubsolverBackend::Pdhg
                       ? cfg.pdhg_v.max_iters
                       : cfg.admm_v.max_iters;
      for (int attempt = 0; attempt <= cfg.budget_doublings; ++attempt) {
        MotionSeq candidate;
        if (cfg.backend_v == SubsolverBackend::Pdhg) {
          PdhgConfig sub = cfg.pdhg_v;
          sub.max_iters = budget;
          if (state.pdhg_v.valid) state.pdhg_v.x = state.v;
          candidate = pdhg_solve_v(state.p, state.v, bt, gt, sub,
                                   &state.pdhg_v, &state.trace);
        } else {
          AdmmConfig sub = cfg.admm_v;
          sub.max_iters = budget;
          candidate = admm_solve_v(state.p, state.v, bt, gt, sub,
                                   &state.admm_v, &state.trace);
        }
        const double e_cand =
            denoising_energy(state.p, candidate, p_tilde, params);
        if (e_cand < e_cur && !nearly_equal(e_cand, e_cur)) {
          state.v = std::move(candidate);
          e_cur = e_cand;
          break;
        }
        if (nearly_equal(e_cand, e_cur)) break;
        budget *= 2;
      }
      state.trace.add("v-update", e_cur);
    }

    ++state.alternation_count;
  }
  state.energy = e_cur;
}

} // namespace dynpat
