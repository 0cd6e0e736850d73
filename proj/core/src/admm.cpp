#include "dynpat/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <tuple>

#include "dynpat/diffops.hpp"
#include "dynpat/energy.hpp"
#include "dynpat/prox.hpp"
#include "dynpat/threading.hpp"

namespace dynpat {

namespace {

double tol_schedule(double scale, int k) {
  return scale / std::pow(static_cast<double>(k), 1.5);
}

ImageSeq project_nonneg(const ImageSeq& p) {
  ImageSeq out = p;
  for (auto& x : out.values()) x = std::max(0.0, x);
  return out;
}

// Warm-started matrix-free CG for the image-update normal equations.
template <typename Apply>
void cg_matrix_free(const Apply& apply, const std::vector<double>& b,
                    std::vector<double>& x, double tol, int min_iters,
                    int max_iters) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), q(n);
  apply(x, q);
  double bnorm = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - q[i];
    bnorm += b[i] * b[i];
    rr += r[i] * r[i];
  }
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  p = r;
  for (int k = 1; k <= max_iters; ++k) {
    apply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    if (!(pq > 0.0)) {
      if (std::sqrt(rr) / bnorm <= tol) return;
      throw SolverError("admm inner CG: operator not positive definite");
    }
    const double alpha = rr / pq;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      rr_new += r[i] * r[i];
    }
    if (rr_new == 0.0 ||
        (std::sqrt(rr_new) / bnorm <= tol && k >= min_iters))
      return;
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
}

} // namespace

SparseSpdSystem assemble_flow_system(const double* p_frame, int nx, int ny,
                                     double gamma_t, double rho, double shift) {
  const int n = nx * ny;
  std::vector<double> cx(n), cy(n);
  grad_central(p_frame, nx, ny, cx.data(), cy.data());

  // COO accumulation, then sort-merge into CSR.
  std::vector<std::tuple<int, int, double>> coo;
  coo.reserve(static_cast<std::size_t>(n) * 14);
  auto add = [&](int i, int j, double v) {
    if (v != 0.0) coo.emplace_back(i, j, v);
  };

  // rho * blockdiag(Lap, Lap), Lap = grad_fwd^T grad_fwd
  for (int comp = 0; comp < 2; ++comp) {
    const int off = comp * n;
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const int i = y * nx + x;
        if (x + 1 < nx) {
          add(off + i, off + i, rho);
          add(off + i + 1, off + i + 1, rho);
          add(off + i, off + i + 1, -rho);
          add(off + i + 1, off + i, -rho);
        }
        if (y + 1 < ny) {
          add(off + i, off + i, rho);
          add(off + i + nx, off + i + nx, rho);
          add(off + i, off + i + nx, -rho);
          add(off + i + nx, off + i, -rho);
        }
      }
  }
  // gamma_t * E^T E: 2x2 pointwise blocks diag(c_k c_l)
  for (int i = 0; i < n; ++i) {
    add(i, i, gamma_t * cx[i] * cx[i] + shift);
    add(n + i, n + i, gamma_t * cy[i] * cy[i] + shift);
    add(i, n + i, gamma_t * cx[i] * cy[i]);
    add(n + i, i, gamma_t * cy[i] * cx[i]);
  }
  if (shift != 0.0) {
    // ensure shifted diagonals exist even where gradients vanish
    for (int i = 0; i < 2 * n; ++i) add(i, i, 0.0);
  }

  std::sort(coo.begin(), coo.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b));
  });

  SparseSpdSystem s;
  s.n = 2 * n;
  s.row_ptr.assign(s.n + 1, 0);
  for (std::size_t k = 0; k < coo.size();) {
    const int i = std::get<0>(coo[k]);
    const int j = std::get<1>(coo[k]);
    double v = 0.0;
    while (k < coo.size() && std::get<0>(coo[k]) == i &&
           std::get<1>(coo[k]) == j) {
      v += std::get<2>(coo[k]);
      ++k;
    }
    s.col.push_back(j);
    s.val.push_back(v);
    ++s.row_ptr[i + 1];
  }
  for (int i = 0; i < s.n; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
  return s;
}

ImageSeq admm_solve_p(const ImageSeq& p_tilde, const MotionSeq& v,
                      double alpha_t, double gamma_t, const AdmmConfig& cfg,
                      AdmmWarmP* warm, const ImageSeq* reference,
                      EnergyTrace* trace, AdmmReport* report) {
  if (p_tilde.nx() != v.nx() || p_tilde.ny() != v.ny() ||
      p_tilde.frames() != v.frames())
    throw std::invalid_argument("admm_solve_p: shape mismatch");
  if (alpha_t < 0 || gamma_t < 0)
    throw std::invalid_argument("admm_solve_p: negative weights");
  if (!(cfg.over_relax > 0.0 && cfg.over_relax < 2.0))
    throw std::invalid_argument("admm_solve_p: over_relax must be in (0,2)");
  if (!(cfg.rho > 0.0))
    throw std::invalid_argument("admm_solve_p: rho must be positive");

  const int nx = p_tilde.nx(), ny = p_tilde.ny(), T = p_tilde.frames();
  const int n = nx * ny;
  const std::size_t nt = static_cast<std::size_t>(n) * T;
  const bool use_tr = gamma_t > 0.0 && T > 1;

  if (alpha_t == 0.0 && !use_tr) {
    // exact prox of the remaining pointwise objective
    ImageSeq out = project_nonneg(p_tilde);
    if (warm) {
      warm->valid = true;
      warm->x = out;
      warm->y1.assign(2 * nt, 0.0);
      warm->w1.assign(2 * nt, 0.0);
      warm->y2.assign(nt, 0.0);
      warm->w2.assign(nt, 0.0);
      warm->rho = cfg.rho;
    }
    return out;
  }

  TransportOperator transport(v);

  ImageSeq x = (warm && warm->valid) ? warm->x : project_nonneg(p_tilde);
  double rho = (warm && warm->valid && warm->rho > 0.0) ? warm->rho : cfg.rho;
  std::vector<double> y1(2 * nt, 0.0), w1(2 * nt, 0.0), y2(nt, 0.0),
      w2(nt, 0.0);
  if (warm && warm->valid && warm->y1.size() == y1.size()) {
    y1 = warm->y1;
    w1 = warm->w1;
    y2 = warm->y2;
    w2 = warm->w2;
  } else {
    for (int t = 0; t < T; ++t) {
      double* y1t = y1.data() + 2 * static_cast<std::size_t>(t) * n;
      grad_fwd(x.frame(t).data(), nx, ny, y1t, y1t + n);
    }
    std::memcpy(y2.data(), x.values().data(), sizeof(double) * nt);
  }

  ImageSeq best = reference ? *reference : project_nonneg(x);
  double best_e = p_subproblem_energy(best, p_tilde, v, alpha_t, gamma_t);
  const double e0 = best_e;

  // normal-equation operator: (1+rho) I + gamma_t D^T D + rho Lap
  auto apply_m = [&](const std::vector<double>& z, std::vector<double>& out) {
    ImageSeq zs(nx, ny, T);
    std::memcpy(zs.values().data(), z.data(), sizeof(double) * nt);
    parallel_for(
        T,
        [&](int t) {
          std::vector<double> gx(n), gy(n), lap(n);
          grad_fwd(zs.frame(t).data(), nx, ny, gx.data(), gy.data());
          grad_fwd_adjoint(gx.data(), gy.data(), nx, ny, lap.data());
          const double* zt = z.data() + static_cast<std::size_t>(t) * n;
          double* ot = out.data() + static_cast<std::size_t>(t) * n;
          for (int i = 0; i < n; ++i)
            ot[i] = (1.0 + rho) * zt[i] + rho * lap[i];
        },
        cfg.threads);
    if (use_tr) {
      const auto r = transport.apply(zs);
      const auto adj = transport.adjoint(r);
      for (std::size_t i = 0; i < nt; ++i) out[i] += gamma_t * adj.values()[i];
    }
  };

  std::vector<double> rhs(nt), kx1(2 * nt), gx(n), gy(n), back(n);
  std::vector<double> xv(x.values());

  for (int k = 1; k <= cfg.max_iters; ++k) {
    // x-update: warm-started CG on the normal equations
    for (int t = 0; t < T; ++t) {
      const double* y1t = y1.data() + 2 * static_cast<std::size_t>(t) * n;
      const double* w1t = w1.data() + 2 * static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i) {
        gx[i] = y1t[i] - w1t[i];
        gy[i] = y1t[n + i] - w1t[n + i];
      }
      grad_fwd_adjoint(gx.data(), gy.data(), nx, ny, back.data());
      const auto pt = p_tilde.frame(t);
      double* rt = rhs.data() + static_cast<std::size_t>(t) * n;
      const double* y2t = y2.data() + static_cast<std::size_t>(t) * n;
      const double* w2t = w2.data() + static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i)
        rt[i] = pt[i] + rho * (back[i] + y2t[i] - w2t[i]);
    }
    cg_matrix_free(apply_m, rhs, xv, tol_schedule(cfg.inner_tol_scale, k),
                   cfg.min_inner_iters, cfg.max_inner_iters);
    std::memcpy(x.values().data(), xv.data(), sizeof(double) * nt);

    // over-relaxed split variable updates
    for (int t = 0; t < T; ++t) {
      double* k1 = kx1.data() + 2 * static_cast<std::size_t>(t) * n;
      grad_fwd(x.frame(t).data(), nx, ny, k1, k1 + n);
    }
    const double s = cfg.over_relax;
    std::vector<double> y1_old(y1), y2_old(y2);
    for (int t = 0; t < T; ++t) {
      const std::size_t o = 2 * static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i) {
        double rel[2] = {s * kx1[o + i] + (1 - s) * y1_old[o + i] + w1[o + i],
                         s * kx1[o + n + i] + (1 - s) * y1_old[o + n + i] +
                             w1[o + n + i]};
        double shr[2];
        prox_tv_shrink(alpha_t / rho, rel, shr, 2);
        y1[o + i] = shr[0];
        y1[o + n + i] = shr[1];
        w1[o + i] = rel[0] - shr[0];
        w1[o + n + i] = rel[1] - shr[1];
      }
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const double rel = s * xv[i] + (1 - s) * y2_old[i] + w2[i];
      y2[i] = std::max(0.0, rel);
      w2[i] = rel - y2[i];
    }

    // split residuals: primal ||Kx - y|| with the updated y, dual
    // rho ||K^T (y - y_old)||
    double pri_sq = 0.0;
    for (std::size_t i = 0; i < 2 * nt; ++i) {
      const double d = kx1[i] - y1[i];
      pri_sq += d * d;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const double d = xv[i] - y2[i];
      pri_sq += d * d;
    }
    double dual_sq = 0.0;
    for (int t = 0; t < T; ++t) {
      const std::size_t o = 2 * static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i) {
        gx[i] = y1[o + i] - y1_old[o + i];
        gy[i] = y1[o + n + i] - y1_old[o + n + i];
      }
      grad_fwd_adjoint(gx.data(), gy.data(), nx, ny, back.data());
      const std::size_t ot = static_cast<std::size_t>(t) * n;
      for (int i = 0; i < n; ++i) {
        const double d = back[i] + (y2[ot + i] - y2_old[ot + i]);
        dual_sq += rho * rho * d * d;
      }
    }
    const double pri = std::sqrt(pri_sq), dua = std::sqrt(dual_sq);
    if (report) {
      report->primal_residual = pri;
      report->dual_residual = dua;
      report->iterations = k;
    }

    // residual balancing of rho
    if (cfg.rho_mode == AdmmConfig::RhoMode::AdaptiveThenFixed &&
        k <= cfg.adapt_until) {
      if (pri > 10.0 * dua) {
        rho *= 2.0;
        for (auto& e : w1) e *= 0.5;
        for (auto& e : w2) e *= 0.5;
      } else if (dua > 10.0 * pri) {
        rho *= 0.5;
        for (auto& e : w1) e *= 2.0;
        for (auto& e : w2) e *= 2.0;
      }
    }

    if (k % cfg.energy_stride == 0 || k == cfg.max_iters) {
      const ImageSeq cand = project_nonneg(x);
      const double e = p_subproblem_energy(cand, p_tilde, v, alpha_t, gamma_t);
      if (trace) trace->add("admm-p", e);
      if (e < best_e) {
        best_e = e;
        best = cand;
      }
      if (e > cfg.divergence_factor * e0 + 1e-6)
        throw SolverError("admm_solve_p diverged",
                          trace ? *trace : EnergyTrace{});
    }
  }

  if (warm) {
    warm->valid = true;
    warm->x = std::move(x);
    warm->y1 = std::move(y1);
    warm->w1 = std::move(w1);
    warm->y2 = std::move(y2);
    warm->w2 = std::move(w2);
    warm->rho = rho;
  }
  return best;
}

MotionSeq admm_solve_v(const ImageSeq& p, const MotionSeq& v_init,
                       double beta_t, double gamma_t, const AdmmConfig& cfg,
                       AdmmWarmV* warm, EnergyTrace* trace) {
  if (p.nx() != v_init.nx() || p.ny() != v_init.ny() ||
      p.frames() != v_init.frames())
    throw std::invalid_argument("admm_solve_v: shape mismatch");
  if (beta_t < 0 || gamma_t < 0)
    throw std::invalid_argument("admm_solve_v: negative weights");
  if (!(cfg.rho_v > 0.0))
    throw std::invalid_argument("admm_solve_v: rho_v must be positive");

  const int nx = p.nx(), ny = p.ny(), T = p.frames();
  const int n = nx * ny;
  const int active = T - 1;
  MotionSeq out = v_init;
  if (gamma_t == 0.0 || active == 0) {
    if (warm) {
      warm->valid = true;
      warm->x = out;
      warm->y.assign(4 * static_cast<std::size_t>(n) * std::max(active, 0), 0.0);
      warm->w = warm->y;
    }
    return out;
  }

  MotionSeq x_all = (warm && warm->valid) ? warm->x : v_init;
  std::vector<double> y_all(4 * static_cast<std::size_t>(n) * active, 0.0);
  std::vector<double> w_all(y_all.size(), 0.0);
  const bool have_warm_duals =
      warm && warm->valid && warm->y.size() == y_all.size();
  if (have_warm_duals) {
    y_all = warm->y;
    w_all = warm->w;
  }

  const double rho = cfg.rho_v;
  const double s = cfg.over_relax;

  parallel_for(
      active,
      [&](int t) {
        const auto pt = p.frame(t);
        const auto pn = p.frame(t + 1);
        std::vector<double> cx(n), cy(n), rho_t(n);
        grad_central(pt.data(), nx, ny, cx.data(), cy.data());
        for (int i = 0; i < n; ++i) rho_t[i] = pn[i] - pt[i];

        const auto sys =
            assemble_flow_system(pt.data(), nx, ny, gamma_t, rho, cfg.spd_shift);
        const auto pc = Preconditioner::make(sys, cfg.precond);

        std::vector<double> x(2 * n);
        std::copy(x_all.component(t, 0).begin(), x_all.component(t, 0).end(),
                  x.begin());
        std::copy(x_all.component(t, 1).begin(), x_all.component(t, 1).end(),
                  x.begin() + n);
        double* y = y_all.data() + 4 * static_cast<std::size_t>(t) * n;
        double* w = w_all.data() + 4 * static_cast<std::size_t>(t) * n;
        if (!have_warm_duals)
          for (int comp = 0; comp < 2; ++comp)
            grad_fwd(x.data() + comp * n, nx, ny, y + 2 * comp * n,
                     y + (2 * comp + 1) * n);

        std::vector<double> best_vx(v_init.component(t, 0).begin(),
                                    v_init.component(t, 0).end());
        std::vector<double> best_vy(v_init.component(t, 1).begin(),
                                    v_init.component(t, 1).end());
        double best_e =
            v_frame_energy(best_vx.data(), best_vy.data(), rho_t.data(),
                           cx.data(), cy.data(), nx, ny, beta_t, gamma_t);
        const double e0 = best_e;

        std::vector<double> rhs(2 * n), kx(4 * n), dx(n), dy(n), back(n);
        for (int k = 1; k <= cfg.max_iters; ++k) {
          // rhs = -gamma E^T rho_t + rho K^T (y - w)
          for (int comp = 0; comp < 2; ++comp) {
            const double* yc = y + 2 * comp * n;
            const double* wc = w + 2 * comp * n;
            for (int i = 0; i < n; ++i) {
              dx[i] = yc[i] - wc[i];
              dy[i] = yc[n + i] - wc[n + i];
            }
            grad_fwd_adjoint(dx.data(), dy.data(), nx, ny, back.data());
            const double* c = comp == 0 ? cx.data() : cy.data();
            double* r = rhs.data() + comp * n;
            for (int i = 0; i < n; ++i)
              r[i] = -gamma_t * c[i] * rho_t[i] + rho * back[i];
          }
          solve_spd(sys, rhs, x, cfg.solver, pc,
                    tol_schedule(cfg.inner_tol_scale, k), cfg.min_inner_iters,
                    cfg.max_inner_iters);

          for (int comp = 0; comp < 2; ++comp)
            grad_fwd(x.data() + comp * n, nx, ny, kx.data() + 2 * comp * n,
                     kx.data() + (2 * comp + 1) * n);
          for (int comp = 0; comp < 2; ++comp) {
            double* yc = y + 2 * comp * n;
            double* wc = w + 2 * comp * n;
            const double* kc = kx.data() + 2 * comp * n;
            for (int i = 0; i < n; ++i) {
              double rel[2] = {s * kc[i] + (1 - s) * yc[i] + wc[i],
                               s * kc[n + i] + (1 - s) * yc[n + i] + wc[n + i]};
              double shr[2];
              prox_tv_shrink(beta_t / rho, rel, shr, 2);
              wc[i] = rel[0] - shr[0];
              wc[n + i] = rel[1] - shr[1];
              yc[i] = shr[0];
              yc[n + i] = shr[1];
            }
          }

          if (k % cfg.energy_stride == 0 || k == cfg.max_iters) {
            const double e =
                v_frame_energy(x.data(), x.data() + n, rho_t.data(), cx.data(),
                               cy.data(), nx, ny, beta_t, gamma_t);
            if (e < best_e) {
              best_e = e;
              best_vx.assign(x.begin(), x.begin() + n);
              best_vy.assign(x.begin() + n, x.end());
            }
            if (e > cfg.divergence_factor * e0 + 1e-6)
              throw SolverError("admm_solve_v diverged",
                                trace ? *trace : EnergyTrace{});
          }
        }

        std::copy(best_vx.begin(), best_vx.end(), out.component(t, 0).begin());
        std::copy(best_vy.begin(), best_vy.end(), out.component(t, 1).begin());
        std::copy(x.begin(), x.begin() + n, x_all.component(t, 0).begin());
        std::copy(x.begin() + n, x.end(), x_all.component(t, 1).begin());
      },
      cfg.threads);

  if (trace)
    trace->add("admm-v", v_subproblem_energy(out, p, beta_t, gamma_t));
  if (warm) {
    warm->valid = true;
    warm->x = std::move(x_all);
    warm->y = std::move(y_all);
    warm->w = std::move(w_all);
  }
  return out;
}

} // namespace dynpat
