#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dynpat/energy.hpp"
#include "dynpat/phantom.hpp"
#include "oracles.hpp"

using namespace dynpat;

namespace {

// independent term-by-term evaluation with naive loops
double naive_denoising_energy(const ImageSeq& p, const MotionSeq& v,
                              const ImageSeq& pt, const RegParams& par) {
  const int nx = p.nx(), ny = p.ny(), T = p.frames();
  double e = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const double d = p.at(x, y, t) - pt.at(x, y, t);
        e += 0.5 * d * d;
        const double gx = x + 1 < nx ? p.at(x + 1, y, t) - p.at(x, y, t) : 0.0;
        const double gy = y + 1 < ny ? p.at(x, y + 1, t) - p.at(x, y, t) : 0.0;
        e += par.eta * par.alpha * std::hypot(gx, gy);
      }
  }
  auto central = [&](const ImageSeq& q, int x, int y, int t, int axis) {
    if (axis == 0) {
      if (nx == 1) return 0.0;
      if (x == 0) return q.at(1, y, t) - q.at(0, y, t);
      if (x == nx - 1) return q.at(nx - 1, y, t) - q.at(nx - 2, y, t);
      return 0.5 * (q.at(x + 1, y, t) - q.at(x - 1, y, t));
    }
    if (ny == 1) return 0.0;
    if (y == 0) return q.at(x, 1, t) - q.at(x, 0, t);
    if (y == ny - 1) return q.at(x, ny - 1, t) - q.at(x, ny - 2, t);
    return 0.5 * (q.at(x, y + 1, t) - q.at(x, y - 1, t));
  };
  for (int t = 0; t + 1 < T; ++t) {
    const int n = nx * ny;
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const double vx = v.component(t, 0)[y * nx + x];
        const double vy = v.component(t, 1)[y * nx + x];
        const double r = p.at(x, y, t + 1) - p.at(x, y, t) +
                         central(p, x, y, t, 0) * vx +
                         central(p, x, y, t, 1) * vy;
        e += 0.5 * par.eta * par.gamma * r * r;
        const double gvx_x =
            x + 1 < nx ? v.component(t, 0)[y * nx + x + 1] - vx : 0.0;
        const double gvx_y =
            y + 1 < ny ? v.component(t, 0)[(y + 1) * nx + x] - vx : 0.0;
        const double gvy_x =
            x + 1 < nx ? v.component(t, 1)[y * nx + x + 1] - vy : 0.0;
        const double gvy_y =
            y + 1 < ny ? v.component(t, 1)[(y + 1) * nx + x] - vy : 0.0;
        e += par.eta * par.beta * (std::hypot(gvx_x, gvx_y) + std::hypot(gvy_x, gvy_y));
        (void)n;
      }
  }
  return e;
}

} // namespace

TEST_CASE("denoising energy basics") {
  const int nx = 8, ny = 8, T = 3;
  RegParams par(0.3, 0.2, 0.7, 0.9);

  SUBCASE("constant image anchored at itself with zero motion is free") {
    ImageSeq p(nx, ny, T);
    for (auto& x : p.values()) x = 2.5;
    MotionSeq v(nx, ny, T);
    CHECK(denoising_energy(p, v, p, par) == 0.0);
  }
  SUBCASE("zero iterate pays only the anchor term") {
    ImageSeq p(nx, ny, T), pt(nx, ny, T);
    pt.values() = oracle::randn(pt.values().size(), 5);
    MotionSeq v(nx, ny, T);
    double half_sq = 0.0;
    for (double x : pt.values()) half_sq += 0.5 * x * x;
    CHECK(denoising_energy(p, v, pt, par) == doctest::Approx(half_sq));
  }
  SUBCASE("random instance matches the naive evaluation") {
    ImageSeq p(nx, ny, T), pt(nx, ny, T);
    p.values() = oracle::randu(p.values().size(), 6);
    pt.values() = oracle::randu(pt.values().size(), 7);
    MotionSeq v(nx, ny, T);
    for (int t = 0; t + 1 < T; ++t)
      for (int comp = 0; comp < 2; ++comp) {
        auto r = oracle::randn(nx * ny, 100 + 2 * t + comp, 0.4);
        std::copy(r.begin(), r.end(), v.component(t, comp).begin());
      }
    const double lib = denoising_energy(p, v, pt, par);
    const double ref = naive_denoising_energy(p, v, pt, par);
    CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
    CHECK(lib >= 0.0);
  }
  SUBCASE("gamma = 0 decomposes over frames") {
    RegParams par0(0.4, 0.1, 0.0, 1.0);
    ImageSeq p(nx, ny, T), pt(nx, ny, T);
    p.values() = oracle::randu(p.values().size(), 8);
    pt.values() = oracle::randu(pt.values().size(), 9);
    MotionSeq v(nx, ny, T);
    for (int t = 0; t + 1 < T; ++t)
      for (int comp = 0; comp < 2; ++comp) {
        auto r = oracle::randn(nx * ny, 300 + 2 * t + comp, 0.3);
        std::copy(r.begin(), r.end(), v.component(t, comp).begin());
      }
    double framewise = 0.0;
    for (int t = 0; t < T; ++t) {
      ImageSeq p1(nx, ny, 1), pt1(nx, ny, 1);
      std::copy(p.frame(t).begin(), p.frame(t).end(), p1.frame(0).begin());
      std::copy(pt.frame(t).begin(), pt.frame(t).end(), pt1.frame(0).begin());
      MotionSeq v1(nx, ny, 1);
      framewise += denoising_energy(p1, v1, pt1, par0);
      if (t + 1 < T)
        framewise += par0.beta_tilde() *
                     (tv_iso(v.component(t, 0).data(), nx, ny) +
                      tv_iso(v.component(t, 1).data(), nx, ny));
    }
    CHECK(denoising_energy(p, v, pt, par0) ==
          doctest::Approx(framewise).epsilon(1e-12));
  }
  SUBCASE("shape mismatch rejected") {
    ImageSeq p(nx, ny, T), pt(nx, ny, T + 1);
    MotionSeq v(nx, ny, T);
    CHECK_THROWS_AS(denoising_energy(p, v, pt, RegParams(1, 1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("total energy") {
  const Grid2D g(16, 16, 2e-4, 1500.0, 24, 4e-8, 3, 0.5);
  WaveOperator fwd(g, two_edge_sensors(g));
  const int T = 3;
  const auto sched = make_rsp_schedule(fwd.sensor_count(), 2, 3);
  RegParams par(1e-3, 1e-3, 0.5);

  DataSeq zero;
  zero.m_tau = g.n_tau;
  zero.frames.resize(T);
  for (int t = 0; t < T; ++t)
    zero.frames[t].assign(sched.rows_for(t) * g.n_tau, 0.0);

  SUBCASE("all-zero problem has zero energy") {
    ImageSeq p(16, 16, T);
    MotionSeq v(16, 16, T);
    CHECK(total_energy(p, v, zero, sched, par, fwd) == 0.0);
  }
  SUBCASE("zero images pay half the data norm") {
    DataSeq data = zero;
    double half_sq = 0.0;
    for (auto& f : data.frames) {
      for (auto& x : f) x = 0.3;
      for (double x : f) half_sq += 0.5 * x * x;
    }
    ImageSeq p(16, 16, T);
    MotionSeq v(16, 16, T);
    CHECK(total_energy(p, v, data, sched, par, fwd) ==
          doctest::Approx(half_sq).epsilon(1e-12));
  }
  SUBCASE("random instance matches a term-by-term script") {
    ImageSeq p(16, 16, T);
    p.values() = oracle::randu(p.values().size(), 21, 0.0, 0.5);
    MotionSeq v(16, 16, T);
    for (int t = 0; t + 1 < T; ++t)
      for (int comp = 0; comp < 2; ++comp) {
        auto r = oracle::randn(16 * 16, 700 + 2 * t + comp, 0.2);
        std::copy(r.begin(), r.end(), v.component(t, comp).begin());
      }
    DataSeq data = zero;
    for (int t = 0; t < T; ++t) {
      auto r = oracle::randn(data.frames[t].size(), 800 + t, 0.01);
      data.frames[t] = r;
    }
    // independent: data term via explicit forward + selection, reg terms via
    // the naive denoiser evaluation with the anchor equal to p
    double ref = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto full = fwd.forward(p.frame(t));
      const auto sub = apply_C(sched, t, full, g.n_tau);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        const double d = sub[i] - data.frames[t][i];
        ref += 0.5 * d * d;
      }
    }
    ImageSeq pt = p; // zero anchor part
    RegParams par_only(par.alpha, par.beta, par.gamma, 1.0);
    ref += naive_denoising_energy(p, v, pt, par_only);
    CHECK(total_energy(p, v, data, sched, par, fwd) ==
          doctest::Approx(ref).epsilon(1e-10));
  }
}
