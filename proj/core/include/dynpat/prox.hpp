#pragma once

#include <algorithm>
#include <cmath>

namespace dynpat {

// Closed-form proximal operators. All of them act pointwise over space and
// time, so field-sized problems decouple into independent 1- or d-dimensional
// subproblems with explicit solutions.

/// prox of a*phi with phi(x) = chi_{x>=0}(x) + (x-z)^2/2:
/// the minimizer of a*phi(x) + (x - xt)^2/2, i.e. max(0, (a*z + xt)/(a+1)).
inline double prox_nonneg_quad(double a, double z, double xt) {
  return std::max(0.0, (a * z + xt) / (a + 1.0));
}

/// prox of a*phi with phi(x) = (z + c.x)^2/2 for a d-vector x. The
/// optimality system (I + a c c^T) x = xt - a z c is solved in closed form
/// via the rank-one (Sherman-Morrison) structure; valid for any d >= 1.
inline void prox_flow_quad(double a, double z, const double* c,
                           const double* xt, double* out, int d) {
  double csq = 0.0, cdot = 0.0;
  for (int i = 0; i < d; ++i) {
    out[i] = xt[i] - a * z * c[i];
    csq += c[i] * c[i];
    cdot += c[i] * out[i];
  }
  const double scale = a * cdot / (1.0 + a * csq);
  for (int i = 0; i < d; ++i) out[i] -= scale * c[i];
}

/// prox of a*||.||_2 on a d-vector: block soft-thresholding of the magnitude
/// with the direction preserved.
inline void prox_tv_shrink(double a, const double* y, double* out, int d) {
  double nrm = 0.0;
  for (int i = 0; i < d; ++i) nrm += y[i] * y[i];
  nrm = std::sqrt(nrm);
  if (nrm <= a || nrm == 0.0) {
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    return;
  }
  const double scale = (nrm - a) / nrm;
  for (int i = 0; i < d; ++i) out[i] = scale * y[i];
}

/// prox of the convex conjugate of a*||.||_2 (the indicator of the l2 ball
/// of radius a): radial projection, independent of the prox step size.
inline void prox_tv_dual_project(double a, const double* y, double* out,
                                 int d) {
  if (a <= 0.0) {
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    return;
  }
  double nrm = 0.0;
  for (int i = 0; i < d; ++i) nrm += y[i] * y[i];
  nrm = std::sqrt(nrm);
  const double denom = std::max(1.0, nrm / a);
  for (int i = 0; i < d; ++i) out[i] = y[i] / denom;
}

/// prox of nu*phi with phi(y) = y^2/(2*gamma_t), the conjugate of the
/// quadratic gamma_t*y^2/2: a plain rescaling gamma_t/(gamma_t + nu).
inline double prox_quad_conjugate(double gamma_t, double nu, double yt) {
  return gamma_t / (gamma_t + nu) * yt;
}

} // namespace dynpat
