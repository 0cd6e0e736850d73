#include "dynpat/linsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dynpat/types.hpp"

namespace dynpat {

void SparseSpdSystem::apply(const double* x, double* y) const {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx)
      acc += val[idx] * x[col[idx]];
    y[i] = acc;
  }
}

std::vector<double> SparseSpdSystem::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx)
      if (col[idx] == i) d[i] = val[idx];
  return d;
}

double SparseSpdSystem::symmetry_error() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx) {
      const int j = col[idx];
      const int lo = row_ptr[j], hi = row_ptr[j + 1];
      const auto it = std::lower_bound(col.begin() + lo, col.begin() + hi, i);
      double aji = 0.0;
      if (it != col.begin() + hi && *it == i)
        aji = val[it - col.begin()];
      worst = std::max(worst, std::abs(val[idx] - aji));
    }
  }
  return worst;
}

Precond precond_from_string(const std::string& s) {
  if (s == "none") return Precond::None;
  if (s == "jacobi") return Precond::Jacobi;
  if (s == "ic0") return Precond::IC0;
  throw std::invalid_argument("unknown preconditioner: " + s);
}

KrylovMethod krylov_from_string(const std::string& s) {
  if (s == "cg") return KrylovMethod::CG;
  if (s == "minres") return KrylovMethod::MINRES;
  throw std::invalid_argument("unknown solver: " + s);
}

namespace {

// Zero-fill incomplete Cholesky on the lower-triangular pattern of a.
// Returns false on pivot breakdown (caller retries with a diagonal shift).
bool try_ic0(const SparseSpdSystem& a, double shift, std::vector<int>& lrow,
             std::vector<int>& lcol, std::vector<double>& lval) {
  const int n = a.n;
  lrow.assign(n + 1, 0);
  lcol.clear();
  lval.clear();
  for (int i = 0; i < n; ++i) {
    for (int idx = a.row_ptr[i]; idx < a.row_ptr[i + 1]; ++idx)
      if (a.col[idx] <= i) {
        lcol.push_back(a.col[idx]);
        lval.push_back(a.val[idx]);
      }
    lrow[i + 1] = static_cast<int>(lcol.size());
  }

  std::vector<int> diag_pos(n, -1);
  for (int i = 0; i < n; ++i)
    for (int idx = lrow[i]; idx < lrow[i + 1]; ++idx)
      if (lcol[idx] == i) diag_pos[i] = idx;
  for (int i = 0; i < n; ++i)
    if (diag_pos[i] < 0) return false; // structurally missing diagonal

  // Dense workspace mapping column -> value of the current row's entries.
  std::vector<double> work(n, 0.0);
  std::vector<int> mark(n, -1);

  for (int i = 0; i < n; ++i) {
    double sum_sq = 0.0;
    for (int idx = lrow[i]; idx < lrow[i + 1]; ++idx) {
      const int j = lcol[idx];
      if (j < i) {
        double s = lval[idx];
        for (int jdx = lrow[j]; jdx < diag_pos[j]; ++jdx) {
          const int k = lcol[jdx];
          if (mark[k] == i) s -= work[k] * lval[jdx];
        }
        const double lij = s / lval[diag_pos[j]];
        lval[idx] = lij;
        work[j] = lij;
        mark[j] = i;
        sum_sq += lij * lij;
      } else { // j == i
        const double s = lval[idx] + shift - sum_sq;
        if (!(s > 0.0)) return false;
        lval[idx] = std::sqrt(s);
      }
    }
  }
  return true;
}

} // namespace

Preconditioner Preconditioner::make(const SparseSpdSystem& a, Precond kind) {
  Preconditioner p;
  p.kind_ = kind;
  p.n_ = a.n;
  if (kind == Precond::Jacobi) {
    p.inv_diag_ = a.diagonal();
    for (auto& d : p.inv_diag_) {
      if (!(d > 0.0))
        throw SolverError("Jacobi preconditioner: nonpositive diagonal");
      d = 1.0 / d;
    }
  } else if (kind == Precond::IC0) {
    const auto diag = a.diagonal();
    double dmax = 0.0;
    for (double d : diag) dmax = std::max(dmax, std::abs(d));
    double shift = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
      ok = try_ic0(a, shift, p.l_row_ptr_, p.l_col_, p.l_val_);
      if (!ok) shift = (shift == 0.0) ? 1e-8 * std::max(dmax, 1.0) : 10.0 * shift;
    }
    if (!ok)
      throw SolverError("IC(0) factorization failed even with diagonal shift");
    p.work_.resize(a.n);
  }
  return p;
}

void Preconditioner::apply(const double* r, double* z) const {
  switch (kind_) {
    case Precond::None:
      std::memcpy(z, r, sizeof(double) * n_);
      return;
    case Precond::Jacobi:
      for (int i = 0; i < n_; ++i) z[i] = inv_diag_[i] * r[i];
      return;
    case Precond::IC0: {
      // L y = r (forward), L^T z = y (backward column sweep)
      double* y = work_.data();
      for (int i = 0; i < n_; ++i) {
        double s = r[i];
        int diag = l_row_ptr_[i + 1] - 1;
        for (int idx = l_row_ptr_[i]; idx < diag; ++idx)
          s -= l_val_[idx] * y[l_col_[idx]];
        y[i] = s / l_val_[diag];
      }
      std::memcpy(z, y, sizeof(double) * n_);
      for (int i = n_ - 1; i >= 0; --i) {
        const int diag = l_row_ptr_[i + 1] - 1;
        z[i] /= l_val_[diag];
        const double zi = z[i];
        for (int idx = l_row_ptr_[i]; idx < diag; ++idx)
          z[l_col_[idx]] -= l_val_[idx] * zi;
      }
      return;
    }
  }
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SpdSolveResult pcg(const SparseSpdSystem& a, std::span<const double> b,
                   std::span<double> x, const Preconditioner& m, double tol,
                   int min_iters, int max_iters,
                   std::vector<ResidualSample>* log) {
  const int n = a.n;
  const auto t0 = Clock::now();
  std::vector<double> r(n), z(n), p(n), q(n);

  double bnorm = 0.0;
  for (int i = 0; i < n; ++i) bnorm += b[i] * b[i];
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0, true};
  }

  a.apply(x.data(), q.data());
  for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
  m.apply(r.data(), z.data());
  p = z;
  double rz = dot(r, z);

  SpdSolveResult res;
  res.rel_residual = norm2(r) / bnorm;
  for (int k = 1; k <= max_iters; ++k) {
    a.apply(p.data(), q.data());
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      if (res.rel_residual <= tol) break; // stagnated at the solution
      throw SolverError("CG breakdown: operator not positive definite");
    }
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res.iterations = k;
    res.rel_residual = norm2(r) / bnorm;
    if (log) log->push_back({k, res.rel_residual, seconds_since(t0)});
    if (res.rel_residual == 0.0 || (res.rel_residual <= tol && k >= min_iters)) {
      res.converged = true;
      break;
    }
    m.apply(r.data(), z.data());
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  if (res.rel_residual <= tol) res.converged = true;
  return res;
}

// Preconditioned MINRES (Paige & Saunders). The stopping rule uses the true
// residual b - A x, recomputed every iteration, so counts are directly
// comparable with CG.
SpdSolveResult minres(const SparseSpdSystem& a, std::span<const double> b,
                      std::span<double> x, const Preconditioner& m, double tol,
                      int min_iters, int max_iters,
                      std::vector<ResidualSample>* log) {
  const int n = a.n;
  const auto t0 = Clock::now();
  std::vector<double> r1(n), r2(n), y(n), v(n), w(n, 0.0), w2(n, 0.0), tmp(n);

  double bnorm = 0.0;
  for (int i = 0; i < n; ++i) bnorm += b[i] * b[i];
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0, true};
  }

  a.apply(x.data(), tmp.data());
  for (int i = 0; i < n; ++i) r1[i] = b[i] - tmp[i];
  m.apply(r1.data(), y.data());
  double beta1 = dot(r1, y);
  if (beta1 < 0.0) throw SolverError("MINRES: preconditioner not positive");
  SpdSolveResult res;
  res.rel_residual = norm2(r1) / bnorm;
  if (beta1 == 0.0) {
    res.converged = res.rel_residual <= tol;
    return res;
  }
  beta1 = std::sqrt(beta1);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1,
         cs = -1.0, sn = 0.0;
  r2 = r1;

  for (int k = 1; k <= max_iters; ++k) {
    const double s = 1.0 / beta;
    for (int i = 0; i < n; ++i) v[i] = s * y[i];
    a.apply(v.data(), y.data());
    if (k >= 2)
      for (int i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
    const double alfa = dot(v, y);
    for (int i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
    r1 = r2;
    r2 = y;
    m.apply(r2.data(), y.data());
    oldb = beta;
    beta = dot(r2, y);
    if (beta < 0.0) throw SolverError("MINRES: preconditioner not positive");
    beta = std::sqrt(beta);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    // new w uses the previous two search vectors (w2 two back, w one back)
    for (int i = 0; i < n; ++i) {
      const double wi = (v[i] - oldeps * w2[i] - delta * w[i]) / gamma;
      w2[i] = w[i];
      w[i] = wi;
      x[i] += phi * wi;
    }

    a.apply(x.data(), tmp.data());
    double rn = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = b[i] - tmp[i];
      rn += d * d;
    }
    res.iterations = k;
    res.rel_residual = std::sqrt(rn) / bnorm;
    if (log) log->push_back({k, res.rel_residual, seconds_since(t0)});
    if (res.rel_residual == 0.0 || (res.rel_residual <= tol && k >= min_iters)) {
      res.converged = true;
      break;
    }
    if (beta == 0.0) break; // invariant subspace exhausted
  }
  if (res.rel_residual <= tol) res.converged = true;
  return res;
}

} // namespace

SpdSolveResult solve_spd(const SparseSpdSystem& a, std::span<const double> b,
                         std::span<double> x, KrylovMethod method,
                         const Preconditioner& precond, double tol,
                         int min_iters, int max_iters,
                         std::vector<ResidualSample>* log) {
  if (b.size() != static_cast<std::size_t>(a.n) || x.size() != b.size())
    throw std::invalid_argument("solve_spd: shape mismatch");
  if (method == KrylovMethod::CG)
    return pcg(a, b, x, precond, tol, min_iters, max_iters, log);
  return minres(a, b, x, precond, tol, min_iters, max_iters, log);
}

} // namespace dynpat
