#include "dynpat/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dynpat/diffops.hpp"
#include "dynpat/threading.hpp"

namespace dynpat {

double tv_iso(const double* u, int nx, int ny) {
  const int n = nx * ny;
  std::vector<double> gx(n), gy(n);
  grad_fwd(u, nx, ny, gx.data(), gy.data());
  double tv = 0.0;
  for (int i = 0; i < n; ++i) tv += std::hypot(gx[i], gy[i]);
  return tv;
}

double flow_misfit_sq(const ImageSeq& p, const MotionSeq& v) {
  TransportOperator transport(v);
  const auto r = transport.apply(p);
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

double denoising_energy(const ImageSeq& p, const MotionSeq& v,
                        const ImageSeq& p_tilde, const RegParams& params) {
  if (!p.same_shape(p_tilde) || p.nx() != v.nx() || p.ny() != v.ny() ||
      p.frames() != v.frames())
    throw std::invalid_argument("denoising_energy: shape mismatch");
  double e = 0.0;
  for (int t = 0; t < p.frames(); ++t) {
    const auto pt = p.frame(t);
    const auto qt = p_tilde.frame(t);
    double fit = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
      const double d = pt[i] - qt[i];
      fit += d * d;
    }
    e += 0.5 * fit;
    if (params.alpha_tilde() > 0.0)
      e += params.alpha_tilde() * tv_iso(pt.data(), p.nx(), p.ny());
    if (params.beta_tilde() > 0.0 && t + 1 < p.frames())
      e += params.beta_tilde() *
           (tv_iso(v.component(t, 0).data(), v.nx(), v.ny()) +
            tv_iso(v.component(t, 1).data(), v.nx(), v.ny()));
  }
  if (params.gamma_tilde() > 0.0)
    e += 0.5 * params.gamma_tilde() * flow_misfit_sq(p, v);
  return e;
}

double total_energy(const ImageSeq& p, const MotionSeq& v, const DataSeq& data,
                    const SamplingSchedule& sched, const RegParams& params,
                    const WaveOperator& fwd, int threads) {
  if (p.nx() != v.nx() || p.ny() != v.ny() || p.frames() != v.frames())
    throw std::invalid_argument("total_energy: image/motion shape mismatch");
  if (data.frame_count() != p.frames())
    throw std::invalid_argument("total_energy: data frame count mismatch");
  if (p.pixels() != fwd.grid().pixels())
    throw std::invalid_argument("total_energy: grid mismatch");

  const int T = p.frames();
  std::vector<double> fit(T, 0.0), tv(T, 0.0);
  parallel_for(
      T,
      [&](int t) {
        auto pred = fwd.forward(p.frame(t));
        auto sub = apply_C(sched, t, pred, data.m_tau);
        const auto& f = data.frames[t];
        if (sub.size() != f.size())
          throw std::invalid_argument("total_energy: data block shape mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < sub.size(); ++i) {
          const double d = sub[i] - f[i];
          s += d * d;
        }
        fit[t] = 0.5 * s;
        if (params.alpha > 0.0)
          tv[t] = params.alpha * tv_iso(p.frame(t).data(), p.nx(), p.ny());
      },
      threads);

  double e = 0.0;
  for (int t = 0; t < T; ++t) e += fit[t] + tv[t];
  if (params.beta > 0.0)
    for (int t = 0; t + 1 < T; ++t)
      e += params.beta * (tv_iso(v.component(t, 0).data(), v.nx(), v.ny()) +
                          tv_iso(v.component(t, 1).data(), v.nx(), v.ny()));
  if (params.gamma > 0.0) e += 0.5 * params.gamma * flow_misfit_sq(p, v);
  return e;
}

double p_subproblem_energy(const ImageSeq& p, const ImageSeq& p_tilde,
                           const MotionSeq& v, double alpha_t,
                           double gamma_t) {
  double e = 0.0;
  for (int t = 0; t < p.frames(); ++t) {
    const auto pt = p.frame(t);
    const auto qt = p_tilde.frame(t);
    double fit = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
      const double d = pt[i] - qt[i];
      fit += d * d;
    }
    e += 0.5 * fit;
    if (alpha_t > 0.0) e += alpha_t * tv_iso(pt.data(), p.nx(), p.ny());
  }
  if (gamma_t > 0.0) e += 0.5 * gamma_t * flow_misfit_sq(p, v);
  return e;
}

double v_frame_energy(const double* vx, const double* vy, const double* rho,
                      const double* gx, const double* gy, int nx, int ny,
                      double beta_t, double gamma_t) {
  const int n = nx * ny;
  double e = 0.0;
  if (beta_t > 0.0) e += beta_t * (tv_iso(vx, nx, ny) + tv_iso(vy, nx, ny));
  double fit = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = rho[i] + gx[i] * vx[i] + gy[i] * vy[i];
    fit += r * r;
  }
  return e + 0.5 * gamma_t * fit;
}

double v_subproblem_energy(const MotionSeq& v, const ImageSeq& p,
                           double beta_t, double gamma_t) {
  const int nx = p.nx(), ny = p.ny(), n = p.pixels();
  std::vector<double> gx(n), gy(n), rho(n);
  double e = 0.0;
  for (int t = 0; t + 1 < p.frames(); ++t) {
    const auto pt = p.frame(t);
    const auto pn = p.frame(t + 1);
    grad_central(pt.data(), nx, ny, gx.data(), gy.data());
    for (int i = 0; i < n; ++i) rho[i] = pn[i] - pt[i];
    e += v_frame_energy(v.component(t, 0).data(), v.component(t, 1).data(),
                        rho.data(), gx.data(), gy.data(), nx, ny, beta_t,
                        gamma_t);
  }
  return e;
}

} // namespace dynpat
