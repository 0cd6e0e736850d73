#include "dynpat/diffops.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

namespace dynpat {

void grad_fwd(const double* u, int nx, int ny, double* gx, double* gy) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      gx[i] = (x + 1 < nx) ? u[i + 1] - u[i] : 0.0;
      gy[i] = (y + 1 < ny) ? u[i + nx] - u[i] : 0.0;
    }
  }
}

void grad_fwd_adjoint(const double* gx, const double* gy, int nx, int ny,
                      double* u) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      double acc = 0.0;
      if (x + 1 < nx) acc -= gx[i];
      if (x > 0) acc += gx[i - 1];
      if (y + 1 < ny) acc -= gy[i];
      if (y > 0) acc += gy[i - nx];
      u[i] = acc;
    }
  }
}

void grad_central(const double* u, int nx, int ny, double* gx, double* gy) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      if (nx == 1)
        gx[i] = 0.0;
      else if (x == 0)
        gx[i] = u[i + 1] - u[i];
      else if (x == nx - 1)
        gx[i] = u[i] - u[i - 1];
      else
        gx[i] = 0.5 * (u[i + 1] - u[i - 1]);
      if (ny == 1)
        gy[i] = 0.0;
      else if (y == 0)
        gy[i] = u[i + nx] - u[i];
      else if (y == ny - 1)
        gy[i] = u[i] - u[i - nx];
      else
        gy[i] = 0.5 * (u[i + nx] - u[i - nx]);
    }
  }
}

void grad_central_adjoint(const double* gx, const double* gy, int nx, int ny,
                          double* u) {
  std::memset(u, 0, sizeof(double) * nx * ny);
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      if (nx > 1) {
        if (x == 0) {
          u[i + 1] += gx[i];
          u[i] -= gx[i];
        } else if (x == nx - 1) {
          u[i] += gx[i];
          u[i - 1] -= gx[i];
        } else {
          u[i + 1] += 0.5 * gx[i];
          u[i - 1] -= 0.5 * gx[i];
        }
      }
      if (ny > 1) {
        if (y == 0) {
          u[i + nx] += gy[i];
          u[i] -= gy[i];
        } else if (y == ny - 1) {
          u[i] += gy[i];
          u[i - nx] -= gy[i];
        } else {
          u[i + nx] += 0.5 * gy[i];
          u[i - nx] -= 0.5 * gy[i];
        }
      }
    }
  }
}

void grad_fwd_abs(const double* u, int nx, int ny, double* gx, double* gy) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      gx[i] = (x + 1 < nx) ? u[i + 1] + u[i] : 0.0;
      gy[i] = (y + 1 < ny) ? u[i + nx] + u[i] : 0.0;
    }
  }
}

void grad_fwd_abs_adjoint(const double* gx, const double* gy, int nx, int ny,
                          double* u) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      double acc = 0.0;
      if (x + 1 < nx) acc += gx[i];
      if (x > 0) acc += gx[i - 1];
      if (y + 1 < ny) acc += gy[i];
      if (y > 0) acc += gy[i - nx];
      u[i] = acc;
    }
  }
}

void grad_central_abs(const double* u, int nx, int ny, double* gx, double* gy) {
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      if (nx == 1)
        gx[i] = 0.0;
      else if (x == 0 || x == nx - 1)
        gx[i] = u[(x == 0) ? i + 1 : i] + u[(x == 0) ? i : i - 1];
      else
        gx[i] = 0.5 * (u[i + 1] + u[i - 1]);
      if (ny == 1)
        gy[i] = 0.0;
      else if (y == 0 || y == ny - 1)
        gy[i] = u[(y == 0) ? i + nx : i] + u[(y == 0) ? i : i - nx];
      else
        gy[i] = 0.5 * (u[i + nx] + u[i - nx]);
    }
  }
}

void grad_central_abs_adjoint(const double* gx, const double* gy, int nx,
                              int ny, double* u) {
  std::memset(u, 0, sizeof(double) * nx * ny);
  for (int y = 0; y < ny; ++y) {
    const int row = y * nx;
    for (int x = 0; x < nx; ++x) {
      const int i = row + x;
      if (nx > 1) {
        if (x == 0) {
          u[i + 1] += gx[i];
          u[i] += gx[i];
        } else if (x == nx - 1) {
          u[i] += gx[i];
          u[i - 1] += gx[i];
        } else {
          u[i + 1] += 0.5 * gx[i];
          u[i - 1] += 0.5 * gx[i];
        }
      }
      if (ny > 1) {
        if (y == 0) {
          u[i + nx] += gy[i];
          u[i] += gy[i];
        } else if (y == ny - 1) {
          u[i] += gy[i];
          u[i - nx] += gy[i];
        } else {
          u[i + nx] += 0.5 * gy[i];
          u[i - nx] += 0.5 * gy[i];
        }
      }
    }
  }
}

namespace {

void check_transport_shapes(const MotionSeq& v, const ImageSeq& p) {
  if (p.nx() != v.nx() || p.ny() != v.ny() || p.frames() != v.frames())
    throw std::invalid_argument("TransportOperator: image/motion shape mismatch");
}

} // namespace

std::vector<double> TransportOperator::apply(const ImageSeq& p) const {
  check_transport_shapes(*v_, p);
  const int nx = p.nx(), ny = p.ny(), n = p.pixels();
  const int rt = residual_frames();
  std::vector<double> r(static_cast<std::size_t>(rt) * n, 0.0);
  std::vector<double> gx(n), gy(n);
  for (int t = 0; t < rt; ++t) {
    const auto pt = p.frame(t);
    const auto pn = p.frame(t + 1);
    const auto vx = v_->component(t, 0);
    const auto vy = v_->component(t, 1);
    grad_central(pt.data(), nx, ny, gx.data(), gy.data());
    double* rt_ptr = r.data() + static_cast<std::size_t>(t) * n;
    for (int i = 0; i < n; ++i)
      rt_ptr[i] = pn[i] - pt[i] + gx[i] * vx[i] + gy[i] * vy[i];
  }
  return r;
}

ImageSeq TransportOperator::adjoint(const std::vector<double>& r) const {
  const int nx = v_->nx(), ny = v_->ny(), n = v_->pixels();
  const int rt = residual_frames();
  if (r.size() != static_cast<std::size_t>(rt) * n)
    throw std::invalid_argument("TransportOperator::adjoint: residual size mismatch");
  ImageSeq out(nx, ny, v_->frames());
  std::vector<double> sx(n), sy(n), back(n);
  for (int t = 0; t < rt; ++t) {
    const double* rt_ptr = r.data() + static_cast<std::size_t>(t) * n;
    const auto vx = v_->component(t, 0);
    const auto vy = v_->component(t, 1);
    auto cur = out.frame(t);
    auto nxt = out.frame(t + 1);
    for (int i = 0; i < n; ++i) {
      cur[i] -= rt_ptr[i];
      nxt[i] += rt_ptr[i];
      sx[i] = vx[i] * rt_ptr[i];
      sy[i] = vy[i] * rt_ptr[i];
    }
    grad_central_adjoint(sx.data(), sy.data(), nx, ny, back.data());
    for (int i = 0; i < n; ++i) cur[i] += back[i];
  }
  return out;
}

std::vector<double> TransportOperator::apply_abs(const ImageSeq& p) const {
  check_transport_shapes(*v_, p);
  const int nx = p.nx(), ny = p.ny(), n = p.pixels();
  const int rt = residual_frames();
  std::vector<double> r(static_cast<std::size_t>(rt) * n, 0.0);
  std::vector<double> gx(n), gy(n);
  for (int t = 0; t < rt; ++t) {
    const auto pt = p.frame(t);
    const auto pn = p.frame(t + 1);
    const auto vx = v_->component(t, 0);
    const auto vy = v_->component(t, 1);
    grad_central_abs(pt.data(), nx, ny, gx.data(), gy.data());
    double* rt_ptr = r.data() + static_cast<std::size_t>(t) * n;
    for (int i = 0; i < n; ++i)
      rt_ptr[i] = pn[i] + pt[i] + gx[i] * std::abs(vx[i]) + gy[i] * std::abs(vy[i]);
  }
  return r;
}

ImageSeq TransportOperator::adjoint_abs(const std::vector<double>& r) const {
  const int nx = v_->nx(), ny = v_->ny(), n = v_->pixels();
  const int rt = residual_frames();
  if (r.size() != static_cast<std::size_t>(rt) * n)
    throw std::invalid_argument("TransportOperator::adjoint_abs: size mismatch");
  ImageSeq out(nx, ny, v_->frames());
  std::vector<double> sx(n), sy(n), back(n);
  for (int t = 0; t < rt; ++t) {
    const double* rt_ptr = r.data() + static_cast<std::size_t>(t) * n;
    const auto vx = v_->component(t, 0);
    const auto vy = v_->component(t, 1);
    auto cur = out.frame(t);
    auto nxt = out.frame(t + 1);
    for (int i = 0; i < n; ++i) {
      cur[i] += rt_ptr[i];
      nxt[i] += rt_ptr[i];
      sx[i] = std::abs(vx[i]) * rt_ptr[i];
      sy[i] = std::abs(vy[i]) * rt_ptr[i];
    }
    grad_central_abs_adjoint(sx.data(), sy.data(), nx, ny, back.data());
    for (int i = 0; i < n; ++i) cur[i] += back[i];
  }
  return out;
}

PointwiseFlowOp::PointwiseFlowOp(const double* p_frame, int nx, int ny)
    : gx_(static_cast<std::size_t>(nx) * ny), gy_(gx_.size()) {
  grad_central(p_frame, nx, ny, gx_.data(), gy_.data());
}

void PointwiseFlowOp::apply(const double* vx, const double* vy,
                            double* out) const {
  const int n = pixels();
  for (int i = 0; i < n; ++i) out[i] = gx_[i] * vx[i] + gy_[i] * vy[i];
}

void PointwiseFlowOp::adjoint(const double* img, double* vx, double* vy) const {
  const int n = pixels();
  for (int i = 0; i < n; ++i) {
    vx[i] = gx_[i] * img[i];
    vy[i] = gy_[i] * img[i];
  }
}

double grad_stack_norm_sq_estimate(int nx, int ny, int iters,
                                   std::uint64_t seed) {
  const int n = nx * ny;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Two identical component blocks; iterate K^T K on the stacked field.
  std::vector<double> u(2 * n), gx(n), gy(n), back(n);
  for (auto& x : u) x = gauss(rng);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    double nrm = 0.0;
    for (double x : u) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (auto& x : u) x /= nrm;
    std::vector<double> w(2 * n);
    for (int comp = 0; comp < 2; ++comp) {
      const double* uc = u.data() + comp * n;
      grad_fwd(uc, nx, ny, gx.data(), gy.data());
      grad_fwd_adjoint(gx.data(), gy.data(), nx, ny, back.data());
      std::memcpy(w.data() + comp * n, back.data(), sizeof(double) * n);
    }
    lambda = 0.0;
    for (int i = 0; i < 2 * n; ++i) lambda += u[i] * w[i];
    u.swap(w);
  }
  return lambda;
}

} // namespace dynpat
