#pragma once

// Test-only reference implementations: derivative-free minimizers and a
// dense Jacobi eigensolver. These stay independent of the library's
// closed-form solutions on purpose.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Ternary search for the minimum of a convex 1D function on [lo, hi].
inline double ternary_min(const std::function<double(double)>& f, double lo,
                          double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

/// Compass (pattern) search: coordinate steps with shrinking step size.
/// Converges on convex piecewise-smooth objectives; dimension-agnostic.
inline std::vector<double> compass_min(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step = 1.0, double min_step = 1e-11) {
  double fx = f(x);
  while (step > min_step) {
    bool improved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (const double dir : {+1.0, -1.0}) {
        auto y = x;
        y[i] += dir * step;
        const double fy = f(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

/// Cyclic Jacobi eigenvalue iteration for small dense symmetric matrices
/// (row-major). Returns the largest eigenvalue.
inline double jacobi_max_eigenvalue(std::vector<double> a, int n,
                                    int sweeps = 50) {
  auto at = [&](int i, int j) -> double& { return a[i * n + j]; };
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  double lam = a[0];
  for (int i = 1; i < n; ++i) lam = std::max(lam, at(i, i));
  return lam;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> randn(std::size_t n, std::uint64_t seed,
                                 double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline std::vector<double> randu(std::size_t n, std::uint64_t seed,
                                 double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> g(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

} // namespace oracle
