// Acceptance suite: one pass/fail line per criterion. Criterion 7 (the
// full-scale reconstruction comparison) lives in acceptance_recon.cpp.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "dynpat/acs.hpp"
#include "dynpat/diffops.hpp"
#include "dynpat/energy.hpp"
#include "dynpat/io.hpp"
#include "dynpat/outer.hpp"
#include "dynpat/phantom.hpp"
#include "dynpat/prox.hpp"
#include "dynpat/recon.hpp"
#include "oracles.hpp"

using namespace dynpat;

namespace {

void report(int criterion, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
              what.c_str());
  std::fflush(stdout);
}

ImageSeq smooth_random_seq(int nx, int ny, int T, std::uint64_t seed,
                           double amp = 1.0) {
  ImageSeq p(nx, ny, T);
  p.values() = oracle::randu(p.values().size(), seed, 0.0, amp);
  for (int pass = 0; pass < 2; ++pass)
    for (int t = 0; t < T; ++t) {
      auto f = p.frame(t);
      std::vector<double> tmp(f.begin(), f.end());
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          double acc = 0.0;
          int cnt = 0;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx, yy = y + dy;
              if (xx >= 0 && xx < nx && yy >= 0 && yy < ny) {
                acc += tmp[yy * nx + xx];
                ++cnt;
              }
            }
          f[y * nx + x] = acc / cnt;
        }
    }
  return p;
}

MotionSeq random_motion(int nx, int ny, int T, std::uint64_t seed,
                        double scale) {
  MotionSeq v(nx, ny, T);
  for (int t = 0; t + 1 < T; ++t)
    for (int comp = 0; comp < 2; ++comp) {
      auto r = oracle::randn(nx * ny, seed + 17 * t + comp, scale);
      std::copy(r.begin(), r.end(), v.component(t, comp).begin());
    }
  return v;
}

} // namespace

TEST_CASE("criterion 1: adjoint identity on a damped 64x64 operator") {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid2D g(64, 64, 2e-4, 1500.0, 128, 4e-8, 15, 0.5);
  WaveOperator op(g, two_edge_sensors(g));
  const std::size_t m = op.sensor_count();

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::randn(g.pixels(), 1000 + trial);
    const auto f = oracle::randn(m * g.n_tau, 2000 + trial);
    const auto ap = op.forward(p);
    const auto atf = op.adjoint(f);
    const double lhs = oracle::dot(ap, f);
    const double rhs = oracle::dot(p, atf);
    double na = 0, nf = 0;
    for (double v : ap) na += v * v;
    for (double v : f) nf += v * v;
    worst = std::max(worst,
                     std::abs(lhs - rhs) / (std::sqrt(na) * std::sqrt(nf)));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool ok = worst <= 1e-10 && secs < 30.0;
  CHECK(worst <= 1e-10);
  CHECK(secs < 30.0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "adjoint identity, 20 pairs: worst rel %.2e (<= 1e-10), "
                "%.1f s (< 30 s)",
                worst, secs);
  report(1, ok, buf);
}

TEST_CASE("criterion 2: dense operator transpose on 16x16, 64 steps") {
  const Grid2D g(16, 16, 2e-4, 1500.0, 64, 4e-8, 3, 0.5);
  WaveOperator op(g, two_edge_sensors(g));
  const int n = g.pixels();
  const int rows = op.sensor_count() * g.n_tau;

  std::vector<double> a(static_cast<std::size_t>(rows) * n);
  std::vector<double> e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    const auto col = op.forward(e);
    for (int i = 0; i < rows; ++i)
      a[static_cast<std::size_t>(i) * n + j] = col[i];
    e[j] = 0.0;
  }
  std::vector<double> data(rows, 0.0);
  double worst = 0.0;
  for (int i = 0; i < rows; ++i) {
    data[i] = 1.0;
    const auto row = op.adjoint(data);
    for (int j = 0; j < n; ++j)
      worst = std::max(
          worst, std::abs(row[j] - a[static_cast<std::size_t>(i) * n + j]));
    data[i] = 0.0;
  }
  const bool ok = worst <= 1e-12;
  CHECK(worst <= 1e-12);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "dense transpose: max entrywise diff %.2e (<= 1e-12)", worst);
  report(2, ok, buf);
}

TEST_CASE("criterion 3: proximal operators match brute-force minimizers") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> upos(0.05, 3.0);
  double worst = 0.0;

  for (int k = 0; k < 100; ++k) {
    // nonnegative quadratic prox
    {
      const double a = upos(rng), z = u(rng), xt = u(rng);
      const double x = prox_nonneg_quad(a, z, xt);
      auto obj = [&](double q) {
        return 0.5 * a * (q - z) * (q - z) + 0.5 * (q - xt) * (q - xt);
      };
      const double hi = std::max({std::abs(z), std::abs(xt), 1.0}) * 3;
      const double q = oracle::ternary_min(obj, 0.0, hi, 300);
      worst = std::max(worst, obj(x) - obj(q));
    }
    // coupled flow quadratic prox, d = 2 and 3
    for (int d : {2, 3}) {
      const double a = upos(rng), z = u(rng);
      double c[3], xt[3], x[3];
      for (int i = 0; i < d; ++i) {
        c[i] = u(rng);
        xt[i] = u(rng);
      }
      prox_flow_quad(a, z, c, xt, x, d);
      auto obj = [&](const std::vector<double>& q) {
        double lin = z;
        for (int i = 0; i < d; ++i) lin += c[i] * q[i];
        double val = 0.5 * a * lin * lin;
        for (int i = 0; i < d; ++i) val += 0.5 * (q[i] - xt[i]) * (q[i] - xt[i]);
        return val;
      };
      const auto q = oracle::compass_min(obj, std::vector<double>(d, 0.0));
      worst = std::max(worst, obj({x, x + d}) - obj(q));
    }
    // isotropic shrink
    {
      const double a = upos(rng);
      double y[2] = {u(rng), u(rng)}, s[2];
      prox_tv_shrink(a, y, s, 2);
      auto obj = [&](const std::vector<double>& q) {
        return a * std::hypot(q[0], q[1]) +
               0.5 * ((q[0] - y[0]) * (q[0] - y[0]) +
                      (q[1] - y[1]) * (q[1] - y[1]));
      };
      const auto q = oracle::compass_min(obj, {y[0], y[1]});
      worst = std::max(worst, obj({s[0], s[1]}) - obj(q));
    }
    // ball projection (prox of the conjugate): brute-force constrained search
    {
      const double a = upos(rng);
      double y[2] = {u(rng), u(rng)}, s[2];
      prox_tv_dual_project(a, y, s, 2);
      auto obj = [&](const std::vector<double>& q) {
        const double nrm = std::hypot(q[0], q[1]);
        if (nrm > a + 1e-12) return 1e30;
        return 0.5 * ((q[0] - y[0]) * (q[0] - y[0]) +
                      (q[1] - y[1]) * (q[1] - y[1]));
      };
      const auto q = oracle::compass_min(obj, {0.0, 0.0});
      worst = std::max(worst, obj({s[0], s[1]}) - obj(q));
    }
    // conjugate quadratic prox
    {
      const double gt = upos(rng), nu = upos(rng), yt = u(rng);
      const double y = prox_quad_conjugate(gt, nu, yt);
      auto obj = [&](double q) {
        return nu * q * q / (2.0 * gt) + 0.5 * (q - yt) * (q - yt);
      };
      const double q = oracle::ternary_min(obj, -10.0, 10.0, 300);
      worst = std::max(worst, obj(y) - obj(q));
    }
  }
  const bool ok = worst <= 1e-6;
  CHECK(worst <= 1e-6);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "prox oracles, 100 seeded instances each: worst objective "
                "gap %.2e (<= 1e-6)",
                worst);
  report(3, ok, buf);
}

TEST_CASE("criterion 4: pdhg and admm agree on convex subproblems") {
  const int nx = 8, ny = 8, T = 3;
  double worst_p = 0.0, worst_v = 0.0;
  for (int k = 0; k < 10; ++k) {
    {
      ImageSeq pt = smooth_random_seq(nx, ny, T, 700 + k, 3.0);
      MotionSeq v = random_motion(nx, ny, T, 800 + k, 0.3);
      PdhgConfig pc;
      pc.max_iters = 20000;
      AdmmConfig ac;
      ac.max_iters = 2000;
      const auto p1 = pdhg_solve_p(pt, v, 0.03, 0.4, pc);
      const auto p2 = admm_solve_p(pt, v, 0.03, 0.4, ac);
      const double e1 = p_subproblem_energy(p1, pt, v, 0.03, 0.4);
      const double e2 = p_subproblem_energy(p2, pt, v, 0.03, 0.4);
      worst_p = std::max(worst_p, std::abs(e1 - e2) / std::max(e1, e2));
    }
    {
      ImageSeq p = smooth_random_seq(nx, ny, T, 900 + k, 3.0);
      MotionSeq v0(nx, ny, T);
      PdhgConfig pc;
      pc.max_iters = 30000;
      AdmmConfig ac;
      ac.max_iters = 3000;
      const auto v1 = pdhg_solve_v(p, v0, 1e-2, 1.0, pc);
      const auto v2 = admm_solve_v(p, v0, 1e-2, 1.0, ac);
      const double e1 = v_subproblem_energy(v1, p, 1e-2, 1.0);
      const double e2 = v_subproblem_energy(v2, p, 1e-2, 1.0);
      worst_v = std::max(worst_v, std::abs(e1 - e2) /
                                      std::max(std::abs(e1), std::abs(e2)));
    }
  }
  const bool ok = worst_p <= 1e-3 && worst_v <= 1e-3;
  CHECK(worst_p <= 1e-3);
  CHECK(worst_v <= 1e-3);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "backend agreement, 10 instances: worst rel gap p %.2e, "
                "v %.2e (<= 1e-3)",
                worst_p, worst_v);
  report(4, ok, buf);
}

TEST_CASE("criterion 5: monotone accepted energies") {
  bool ok = true;

  // alternation monotonicity for every backend combination
  const int nx = 8, ny = 8, T = 3;
  ImageSeq pt = smooth_random_seq(nx, ny, T, 1100, 3.0);
  RegParams params(5e-3, 5e-3, 0.5, 1.0);
  for (auto bp : {SubsolverBackend::Pdhg, SubsolverBackend::Admm})
    for (auto bv : {SubsolverBackend::Pdhg, SubsolverBackend::Admm}) {
      auto state = make_acs_state(nx, ny, T);
      AcsConfig cfg;
      cfg.backend_p = bp;
      cfg.backend_v = bv;
      cfg.alternations = 4;
      acs_solve(pt, state, params, cfg);
      double prev = 1e300;
      for (const auto& r : state.trace.records())
        if (r.label == "p-update" || r.label == "v-update") {
          if (r.energy > prev + 1e-12) ok = false;
          prev = r.energy;
        }
    }

  // outer-loop monotonicity on a small noisy reconstruction
  const Grid2D g(16, 16, 2e-4, 1500.0, 24, 4e-8, 3, 0.5);
  WaveOperator fwd(g, two_edge_sensors(g));
  const auto sched = make_rsp_schedule(fwd.sensor_count(), 4, 13);
  std::vector<EllipseTrack> tracks = {interpolate_track(
      {8, 8, 3, 2, 0.1, 1.0}, {9.5, 9, 3.4, 2.4, 0.6, 1.0}, 6)};
  const auto truth = make_dynamic_phantom(g, tracks, 6);
  const auto sim = simulate_data(truth, fwd, sched, 5e-3, 4);
  OuterConfig cfg;
  cfg.iterations = 12;
  cfg.lipschitz_iters = 12;
  cfg.threads = 1;
  const auto res =
      fista_reconstruct(sim.sub, sched, fwd, RegParams(1e-4, 1e-4, 0.1), cfg);
  for (std::size_t i = 1; i < res.trace.records().size(); ++i)
    if (res.trace.records()[i].energy >
        res.trace.records()[i - 1].energy + 1e-12)
      ok = false;

  CHECK(ok);
  report(5, ok,
         "accepted block energies and outer total energies nonincreasing on "
         "all runs");
}

TEST_CASE("criterion 6: paper noise level reproduces the reported SNR") {
  const Grid2D g(100, 100, 2e-4, 1500.0, 472, 4e-8, 20, 0.5);
  WaveOperator fwd(g, two_edge_sensors(g));
  const int T = 25;
  const auto phantom = make_dynamic_phantom(g, default_phantom_tracks(T), T);
  const auto sched = make_rsp_schedule(fwd.sensor_count(), 25, 1234);
  const auto sim = simulate_data(phantom, fwd, sched, 5e-3, 42);
  const bool ok = std::abs(sim.mean_snr_db - 20.65) <= 0.5;
  CHECK(std::abs(sim.mean_snr_db - 20.65) <= 0.5);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "default phantom at sigma 5e-3: mean SNR %.2f dB "
                "(20.65 +- 0.5)",
                sim.mean_snr_db);
  report(6, ok, buf);
}

TEST_CASE("criterion 8: ic0-cg beats plain cg on the motion system") {
  // moderate tv-fbf reconstruction of the default phantom provides the
  // image frames whose flow system is benchmarked
  const Grid2D g(100, 100, 2e-4, 1500.0, 472, 4e-8, 20, 0.5);
  WaveOperator fwd(g, two_edge_sensors(g));
  const int T = 25;
  const auto phantom = make_dynamic_phantom(g, default_phantom_tracks(T), T);
  const auto sched = make_rsp_schedule(fwd.sensor_count(), 25, 1234);
  const auto sim = simulate_data(phantom, fwd, sched, 5e-3, 42);
  OuterConfig cfg;
  cfg.iterations = 10;
  cfg.lipschitz_iters = 12;
  const auto rec =
      fbf_reconstruct(sim.sub, sched, fwd, 3.2e-4, FbfMode::Tv, cfg);

  const int frame = T / 2;
  const auto sys =
      assemble_flow_system(rec.p.frame(frame).data(), 100, 100, 1.0, 0.1);
  const int n = rec.p.pixels();
  PointwiseFlowOp e(rec.p.frame(frame).data(), 100, 100);
  std::vector<double> rho_t(n), rhs(2 * n);
  for (int i = 0; i < n; ++i)
    rho_t[i] = -(rec.p.frame(frame + 1)[i] - rec.p.frame(frame)[i]);
  e.adjoint(rho_t.data(), rhs.data(), rhs.data() + n);

  std::string csv = "solver,precond,iteration,rel_residual,seconds\n";
  int iters_plain = 0, iters_ic0 = 0;
  for (auto pk : {Precond::None, Precond::Jacobi, Precond::IC0}) {
    std::vector<double> x(2 * n, 0.0);
    std::vector<ResidualSample> log;
    const auto pc = Preconditioner::make(sys, pk);
    const auto res =
        solve_spd(sys, rhs, x, KrylovMethod::CG, pc, 1e-6, 3, 20000, &log);
    REQUIRE(res.converged);
    const char* pname =
        pk == Precond::None ? "none" : (pk == Precond::Jacobi ? "jacobi" : "ic0");
    for (const auto& s : log)
      csv += std::string("cg,") + pname + "," + std::to_string(s.iteration) +
             "," + std::to_string(s.rel_residual) + "," +
             std::to_string(s.seconds) + "\n";
    if (pk == Precond::None) iters_plain = res.iterations;
    if (pk == Precond::IC0) iters_ic0 = res.iterations;
  }
  write_text_file("acceptance_solver_bench.csv", csv);

  const bool ok = iters_ic0 < iters_plain;
  CHECK(iters_ic0 < iters_plain);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "flow-system bench at rel residual 1e-6: IC(0)-CG %d iters < "
                "plain CG %d iters (csv written)",
                iters_ic0, iters_plain);
  report(8, ok, buf);
}

TEST_CASE("criterion 9: stacked gradient norm bound") {
  bool ok = true;
  double top = 0.0;
  for (int n : {8, 16, 32, 64, 128}) {
    const double est = grad_stack_norm_sq_estimate(n, n, 80, 2024);
    top = std::max(top, est);
    if (est > 8.0 + 1e-9) ok = false;
  }
  CHECK(ok);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "norm estimate over 8..128 grids: max %.4f (<= 4d = 8)", top);
  report(9, ok, buf);
}

TEST_CASE("criterion 10: both motion backends recover a translation") {
  const int n = 16, T = 4;
  ImageSeq p(n, n, T);
  const double cy = 0.5 * (n - 1);
  for (int t = 0; t < T; ++t) {
    const double cx = 0.5 * (n - 1) + 1.0 - t;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        p.at(x, y, t) =
            std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 8.0);
  }
  MotionSeq v0(n, n, T);
  PdhgConfig pc;
  pc.max_iters = 20000;
  const auto v1 = pdhg_solve_v(p, v0, 1e-2, 1.0, pc);
  AdmmConfig ac;
  ac.max_iters = 400;
  const auto v2 = admm_solve_v(p, v0, 1e-2, 1.0, ac);

  double worst = 0.0;
  for (const auto* v : {&v1, &v2})
    for (int t = 0; t + 1 < T; ++t) {
      double peak = 0.0;
      for (double x : p.frame(t)) peak = std::max(peak, x);
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          if (p.at(x, y, t) < 0.2 * peak) continue;
          const int i = y * n + x;
          worst = std::max(worst, std::abs(v->component(t, 0)[i] + 1.0));
          worst = std::max(worst, std::abs(v->component(t, 1)[i]));
        }
    }
  const bool ok = worst <= 0.2;
  CHECK(worst <= 0.2);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "interior flow error vs (-1, 0): worst %.3f px/frame (<= 0.2)",
                worst);
  report(10, ok, buf);
}
