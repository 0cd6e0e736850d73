#include "dynpat/outer.hpp"

#include <cmath>
#include <stdexcept>

#include "dynpat/energy.hpp"
#include "dynpat/threading.hpp"

namespace dynpat {

namespace {

// p_tilde = z - eta * A^T C_t^T (C_t A z_t - f_t), frame-parallel
ImageSeq gradient_step(const ImageSeq& z, const DataSeq& data,
                       const SamplingSchedule& sched, const WaveOperator& fwd,
                       double eta, int threads) {
  ImageSeq p_tilde(z.nx(), z.ny(), z.frames());
  parallel_for(
      z.frames(),
      [&](int t) {
        auto pred = fwd.forward(z.frame(t));
        auto sub = apply_C(sched, t, pred, data.m_tau);
        const auto& f = data.frames[t];
        if (sub.size() != f.size())
          throw std::invalid_argument("gradient_step: data block mismatch");
        for (std::size_t i = 0; i < sub.size(); ++i) sub[i] -= f[i];
        auto full = apply_C_adjoint(sched, t, sub, data.m_tau);
        auto grad = fwd.adjoint(full);
        const auto zt = z.frame(t);
        auto pt = p_tilde.frame(t);
        for (std::size_t i = 0; i < grad.size(); ++i)
          pt[i] = zt[i] - eta * grad[i];
      },
      threads);
  return p_tilde;
}

} // namespace

ReconResult fista_reconstruct(const DataSeq& data,
                              const SamplingSchedule& sched,
                              const WaveOperator& fwd, const RegParams& params,
                              const OuterConfig& cfg) {
  const auto& grid = fwd.grid();
  const int T = data.frame_count();
  if (T < 1) throw std::invalid_argument("fista_reconstruct: no data frames");
  if (data.m_tau != static_cast<std::size_t>(fwd.n_tau()))
    throw std::invalid_argument("fista_reconstruct: m_tau mismatch");
  if (sched.total_sensors != fwd.sensor_count())
    throw std::invalid_argument("fista_reconstruct: schedule/operator mismatch");

  ReconResult res;
  res.lipschitz = cfg.lipschitz;
  if (res.lipschitz.empty()) {
    res.lipschitz.resize(sched.period());
    parallel_for(
        sched.period(),
        [&](int t) {
          res.lipschitz[t] =
              fwd.estimate_lipschitz(sched, t, cfg.lipschitz_iters,
                                     cfg.seed + static_cast<std::uint64_t>(t));
        },
        cfg.threads);
  }
  double l_max = 0.0;
  for (double l : res.lipschitz) l_max = std::max(l_max, l);
  if (!(l_max > 0.0))
    throw SolverError("fista_reconstruct: nonpositive Lipschitz estimate");
  const double eta = cfg.step_scale / l_max;
  res.eta = eta;

  RegParams scaled(params.alpha, params.beta, params.gamma, eta);

  AcsState state = make_acs_state(grid.nx, grid.ny, T);
  AcsConfig acs_cfg = cfg.acs;
  acs_cfg.pdhg_p.threads = acs_cfg.pdhg_v.threads = cfg.threads;
  acs_cfg.admm_p.threads = acs_cfg.admm_v.threads = cfg.threads;

  ImageSeq p = state.p;      // accepted iterate
  ImageSeq p_prev = p;
  double energy =
      total_energy(p, state.v, data, sched, scaled, fwd, cfg.threads);
  res.trace.add("outer-init", energy);

  double t_mom = 1.0;
  for (int i = 1; i <= cfg.iterations; ++i) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    const double momentum = (t_mom - 1.0) / t_next;

    ImageSeq z(grid.nx, grid.ny, T);
    for (std::size_t k = 0; k < z.values().size(); ++k)
      z.values()[k] =
          p.values()[k] + momentum * (p.values()[k] - p_prev.values()[k]);

    AcsState snapshot = state;
    auto p_tilde = gradient_step(z, data, sched, fwd, eta, cfg.threads);
    acs_solve(p_tilde, state, scaled, acs_cfg);
    double e_new =
        total_energy(state.p, state.v, data, sched, scaled, fwd, cfg.threads);

    if (e_new <= energy) {
      p_prev = std::move(p);
      p = state.p;
      energy = e_new;
      t_mom = t_next;
      res.trace.add("fista", energy);
      continue;
    }

    // extrapolation overshot: restart momentum and redo a plain step
    state = snapshot;
    p_tilde = gradient_step(p, data, sched, fwd, eta, cfg.threads);
    acs_solve(p_tilde, state, scaled, acs_cfg);
    e_new =
        total_energy(state.p, state.v, data, sched, scaled, fwd, cfg.threads);
    if (e_new <= energy) {
      p_prev = p;
      p = state.p;
      energy = e_new;
    } else {
      state = std::move(snapshot); // keep the previous accepted iterate
    }
    t_mom = 1.0;
    res.trace.add("fista-restart", energy);
  }

  res.p = std::move(p);
  res.v = state.v;
  res.acs_trace = std::move(state.trace);
  return res;
}

ReconResult fbf_reconstruct(const DataSeq& data, const SamplingSchedule& sched,
                            const WaveOperator& fwd, double alpha, FbfMode mode,
                            const OuterConfig& cfg) {
  const double a = mode == FbfMode::Tv ? alpha : 0.0;
  RegParams params(a, 0.0, 0.0);
  return fista_reconstruct(data, sched, fwd, params, cfg);
}

} // namespace dynpat
