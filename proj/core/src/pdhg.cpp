#include "dynpat/pdhg.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "dynpat/diffops.hpp"
#include "dynpat/energy.hpp"
#include "dynpat/prox.hpp"
#include "dynpat/threading.hpp"

namespace dynpat {

namespace {

ImageSeq project_nonneg(const ImageSeq& p) {
  ImageSeq out = p;
  for (auto& x : out.values()) x = std::max(0.0, x);
  return out;
}

// Power-iteration estimate of |K|^2 for K p = [grad; D_v] p.
double p_operator_norm_sq(const MotionSeq& v, bool with_transport, int nx,
                          int ny, int frames, int iters) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ImageSeq x(nx, ny, frames);
  for (auto& e : x.values()) e = gauss(rng);
  const int n = nx * ny;
  std::vector<double> gx(n), gy(n), back(n);
  TransportOperator transport(v);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    double nrm = 0.0;
    for (double e : x.values()) nrm += e * e;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (auto& e : x.values()) e /= nrm;

    ImageSeq w(nx, ny, frames);
    for (int t = 0; t < frames; ++t) {
      grad_fwd(x.frame(t).data(), nx, ny, gx.data(), gy.data());
      grad_fwd_adjoint(gx.data(), gy.data(), nx, ny, back.data());
      auto wt = w.frame(t);
      for (int i = 0; i < n; ++i) wt[i] += back[i];
    }
    if (with_transport) {
      const auto r = transport.apply(x);
      const auto adj = transport.adjoint(r);
      for (std::size_t i = 0; i < w.values().size(); ++i)
        w.values()[i] += adj.values()[i];
    }
    lambda = 0.0;
    for (std::size_t i = 0; i < w.values().size(); ++i)
      lambda += x.values()[i] * w.values()[i];
    x = std::move(w);
  }
  return lambda;
}

} // namespace

ImageSeq pdhg_solve_p(const ImageSeq& p_tilde, const MotionSeq& v,
                      double alpha_t, double gamma_t, const PdhgConfig& cfg,
                      PdhgWarmP* warm, EnergyTrace* trace) {
  if (p_tilde.nx() != v.nx() || p_tilde.ny() != v.ny() ||
      p_tilde.frames() != v.frames())
    throw std::invalid_argument("pdhg_solve_p: shape mismatch");
  if (alpha_t < 0 || gamma_t < 0)
    throw std::invalid_argument("pdhg_solve_p: negative weights");

  const int nx = p_tilde.nx(), ny = p_tilde.ny(), T = p_tilde.frames();
  const int n = nx * ny;
  const bool use_tv = alpha_t > 0.0;
  const bool use_tr = gamma_t > 0.0 && T > 1;

  // Degenerate split: the objective reduces to the pointwise data term and
  // its prox is the exact nonnegative projection.
  if (!use_tv && !use_tr) {
    ImageSeq out = project_nonneg(p_tilde);
    if (warm) {
      warm->valid = true;
      warm->x = out;
      warm->y_tv.assign(2 * static_cast<std::size_t>(n) * T, 0.0);
      warm->y_tr.assign(static_cast<std::size_t>(n) * (T - 1), 0.0);
    }
    return out;
  }

  TransportOperator transport(v);

  // step sizes
  std::vector<double> sigma_tv(n, 1.0);  // shared by the d dual rows of a pixel
  std::vector<double> sigma_tr;          // per (pixel, transported frame)
  std::vector<double> tau;               // per (pixel, frame)
  double mu = cfg.mu, nu = cfg.nu;
  if (cfg.mode == PdhgConfig::StepMode::DiagPrecond) {
    std::vector<double> ones(n, 1.0), rx(n), ry(n);
    grad_fwd_abs(ones.data(), nx, ny, rx.data(), ry.data());
    for (int i = 0; i < n; ++i) {
      const double s = std::max(rx[i], ry[i]);
      sigma_tv[i] = s > 0.0 ? 1.0 / s : 1.0;
    }
    tau.assign(static_cast<std::size_t>(n) * T, 0.0);
    std::vector<double> colsum(n);
    if (use_tv) {
      std::vector<double> ones2(n, 1.0);
      grad_fwd_abs_adjoint(ones2.data(), ones2.data(), nx, ny, colsum.data());
      for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i) tau[static_cast<std::size_t>(t) * n + i] += colsum[i];
    }
    if (use_tr) {
      ImageSeq ones_seq(nx, ny, T);
      std::fill(ones_seq.values().begin(), ones_seq.values().end(), 1.0);
      sigma_tr = transport.apply_abs(ones_seq);
      for (auto& s : sigma_tr) s = s > 0.0 ? 1.0 / s : 1.0;
      std::vector<double> ones_res(static_cast<std::size_t>(n) * (T - 1), 1.0);
      const auto csum = transport.adjoint_abs(ones_res);
      for (std::size_t i = 0; i < tau.size(); ++i) tau[i] += csum.values()[i];
    }
    for (auto& t : tau) t = t > 0.0 ? 1.0 / t : 1.0;
  } else {
    const double norm_sq =
        p_operator_norm_sq(v, use_tr, nx, ny, T, cfg.norm_check_iters);
    if (mu <= 0.0 || nu <= 0.0) {
      const double s = 1.0 / std::sqrt(std::max(norm_sq, 1e-12));
      mu = 0.99 * s;
      nu = 0.99 * s;
    }
    if (mu * nu * norm_sq > 1.0 + 1e-9)
      throw std::invalid_argument(
          "pdhg_solve_p: fixed steps violate mu*nu*|K|^2 <= 1");
  }

  // state
  ImageSeq x = (warm && warm->valid) ? warm->x : project_nonneg(p_tilde);
  std::vector<double> y_tv(2 * static_cast<std::size_t>(n) * T, 0.0);
  std::vector<double> y_tr(static_cast<std::size_t>(n) * (T - 1), 0.0);
  if (warm && warm->valid) {
    if (warm->y_tv.size() == y_tv.size()) y_tv = warm->y_tv;
    if (warm->y_tr.size() == y_tr.size()) y_tr = warm->y_tr;
  }
  ImageSeq x_hat = x;

  const double e0 = p_subproblem_energy(x, p_tilde, v, alpha_t, gamma_t);
  ImageSeq best = x;
  double best_e = e0;

  std::vector<double> gx(n), gy(n), back(n);
  ImageSeq kty(nx, ny, T);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    // dual ascent on y = (y_tv, y_tr) at the over-relaxed point
    if (use_tv) {
      for (int t = 0; t < T; ++t) {
        grad_fwd(x_hat.frame(t).data(), nx, ny, gx.data(), gy.data());
        double* ytx = y_tv.data() + 2 * static_cast<std::size_t>(t) * n;
        double* yty = ytx + n;
        for (int i = 0; i < n; ++i) {
          const double s =
              cfg.mode == PdhgConfig::StepMode::DiagPrecond ? sigma_tv[i] : nu;
          double pair[2] = {ytx[i] + s * gx[i], yty[i] + s * gy[i]};
          double proj[2];
          prox_tv_dual_project(alpha_t, pair, proj, 2);
          ytx[i] = proj[0];
          yty[i] = proj[1];
        }
      }
    }
    if (use_tr) {
      const auto r = transport.apply(x_hat);
      for (std::size_t i = 0; i < y_tr.size(); ++i) {
        const double s =
            cfg.mode == PdhgConfig::StepMode::DiagPrecond ? sigma_tr[i] : nu;
        y_tr[i] = prox_quad_conjugate(gamma_t, s, y_tr[i] + s * r[i]);
      }
    }

    // primal descent with the pointwise data prox
    std::fill(kty.values().begin(), kty.values().end(), 0.0);
    if (use_tv) {
      for (int t = 0; t < T; ++t) {
        const double* ytx = y_tv.data() + 2 * static_cast<std::size_t>(t) * n;
        grad_fwd_adjoint(ytx, ytx + n, nx, ny, back.data());
        auto kt = kty.frame(t);
        for (int i = 0; i < n; ++i) kt[i] += back[i];
      }
    }
    if (use_tr) {
      const auto adj = transport.adjoint(y_tr);
      for (std::size_t i = 0; i < kty.values().size(); ++i)
        kty.values()[i] += adj.values()[i];
    }
    for (int t = 0; t < T; ++t) {
      auto xt = x.frame(t);
      auto ht = x_hat.frame(t);
      const auto pt = p_tilde.frame(t);
      const auto kt = kty.frame(t);
      const double* taut = tau.empty() ? nullptr : tau.data() + static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i) {
        const double step = taut ? taut[i] : mu;
        const double x_new = prox_nonneg_quad(step, pt[i], xt[i] - step * kt[i]);
        ht[i] = x_new + cfg.theta * (x_new - xt[i]);
        xt[i] = x_new;
      }
    }

    if (k % cfg.energy_stride == 0 || k == cfg.max_iters) {
      const double e = p_subproblem_energy(x, p_tilde, v, alpha_t, gamma_t);
      if (trace) trace->add("pdhg-p", e);
      if (e < best_e) {
        best_e = e;
        best = x;
      }
      if (e > cfg.divergence_factor * e0 + 1e-6)
        throw SolverError("pdhg_solve_p diverged",
                          trace ? *trace : EnergyTrace{});
    }
  }

  if (warm) {
    warm->valid = true;
    warm->x = std::move(x);
    warm->y_tv = std::move(y_tv);
    warm->y_tr = std::move(y_tr);
  }
  return best;
}

MotionSeq pdhg_solve_v(const ImageSeq& p, const MotionSeq& v_init,
                       double beta_t, double gamma_t, const PdhgConfig& cfg,
                       PdhgWarmV* warm, EnergyTrace* trace) {
  if (p.nx() != v_init.nx() || p.ny() != v_init.ny() ||
      p.frames() != v_init.frames())
    throw std::invalid_argument("pdhg_solve_v: shape mismatch");
  if (beta_t < 0 || gamma_t < 0)
    throw std::invalid_argument("pdhg_solve_v: negative weights");

  const int nx = p.nx(), ny = p.ny(), T = p.frames();
  const int n = nx * ny;
  const int active = T - 1;
  MotionSeq out = v_init;
  if (gamma_t == 0.0 || active == 0) {
    // motion decouples from the images; keep the incoming iterate
    if (warm) {
      warm->valid = true;
      warm->x = out;
      warm->y.assign(4 * static_cast<std::size_t>(n) * std::max(active, 0), 0.0);
    }
    return out;
  }

  // The Jacobian split has |K|^2 <= 4d, so mu = 1/(2d), nu = 1/2 is safe.
  const double mu = cfg.mu > 0.0 ? cfg.mu : 0.25;
  const double nu = cfg.nu > 0.0 ? cfg.nu : 0.5;
  const double norm_sq =
      grad_stack_norm_sq_estimate(nx, ny, cfg.norm_check_iters, 12345);
  if (mu * nu * norm_sq > 1.0 + 1e-9)
    throw std::invalid_argument(
        "pdhg_solve_v: steps violate mu*nu*|K|^2 <= 1");

  std::vector<double> y_all(4 * static_cast<std::size_t>(n) * active, 0.0);
  if (warm && warm->valid && warm->y.size() == y_all.size()) y_all = warm->y;
  MotionSeq x_all = (warm && warm->valid) ? warm->x : v_init;

  EnergyTrace local_trace;
  parallel_for(
      active,
      [&](int t) {
        const auto pt = p.frame(t);
        const auto pn = p.frame(t + 1);
        std::vector<double> cx(n), cy(n), rho(n);
        grad_central(pt.data(), nx, ny, cx.data(), cy.data());
        for (int i = 0; i < n; ++i) rho[i] = pn[i] - pt[i];

        std::vector<double> vx(x_all.component(t, 0).begin(),
                               x_all.component(t, 0).end());
        std::vector<double> vy(x_all.component(t, 1).begin(),
                               x_all.component(t, 1).end());
        std::vector<double> hx = vx, hy = vy;
        double* y = y_all.data() + 4 * static_cast<std::size_t>(t) * n;

        std::vector<double> best_x = {v_init.component(t, 0).begin(),
                                      v_init.component(t, 0).end()};
        std::vector<double> best_y = {v_init.component(t, 1).begin(),
                                      v_init.component(t, 1).end()};
        double best_e = v_frame_energy(best_x.data(), best_y.data(), rho.data(),
                                       cx.data(), cy.data(), nx, ny, beta_t,
                                       gamma_t);
        const double e0 = best_e;

        std::vector<double> gx(n), gy(n), kx(n), ky(n);
        for (int k = 1; k <= cfg.max_iters; ++k) {
          // dual: project each component's gradient onto the beta ball
          for (int comp = 0; comp < 2; ++comp) {
            const double* h = comp == 0 ? hx.data() : hy.data();
            double* yc = y + 2 * static_cast<std::size_t>(comp) * n;
            grad_fwd(h, nx, ny, gx.data(), gy.data());
            for (int i = 0; i < n; ++i) {
              double pair[2] = {yc[i] + nu * gx[i], yc[n + i] + nu * gy[i]};
              double proj[2];
              prox_tv_dual_project(beta_t, pair, proj, 2);
              yc[i] = proj[0];
              yc[n + i] = proj[1];
            }
          }
          // primal: pointwise coupled quadratic prox
          grad_fwd_adjoint(y, y + n, nx, ny, kx.data());
          grad_fwd_adjoint(y + 2 * n, y + 3 * n, nx, ny, ky.data());
          for (int i = 0; i < n; ++i) {
            const double c[2] = {cx[i], cy[i]};
            const double xt[2] = {vx[i] - mu * kx[i], vy[i] - mu * ky[i]};
            double xn[2];
            prox_flow_quad(mu * gamma_t, rho[i], c, xt, xn, 2);
            hx[i] = xn[0] + cfg.theta * (xn[0] - vx[i]);
            hy[i] = xn[1] + cfg.theta * (xn[1] - vy[i]);
            vx[i] = xn[0];
            vy[i] = xn[1];
          }

          if (k % cfg.energy_stride == 0 || k == cfg.max_iters) {
            const double e =
                v_frame_energy(vx.data(), vy.data(), rho.data(), cx.data(),
                               cy.data(), nx, ny, beta_t, gamma_t);
            if (e < best_e) {
              best_e = e;
              best_x = vx;
              best_y = vy;
            }
            if (e > cfg.divergence_factor * e0 + 1e-6)
              throw SolverError("pdhg_solve_v diverged",
                                trace ? *trace : EnergyTrace{});
          }
        }

        std::copy(best_x.begin(), best_x.end(), out.component(t, 0).begin());
        std::copy(best_y.begin(), best_y.end(), out.component(t, 1).begin());
        std::copy(vx.begin(), vx.end(), x_all.component(t, 0).begin());
        std::copy(vy.begin(), vy.end(), x_all.component(t, 1).begin());
      },
      cfg.threads);

  if (trace)
    trace->add("pdhg-v", v_subproblem_energy(out, p, beta_t, gamma_t));
  if (warm) {
    warm->valid = true;
    warm->x = std::move(x_all);
    warm->y = std::move(y_all);
  }
  return out;
}

} // namespace dynpat
