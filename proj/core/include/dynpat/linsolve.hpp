#pragma once

#include <span>
#include <string>
#include <vector>

namespace dynpat {

/// Sparse symmetric positive (semi-)definite matrix in CSR form, both
/// triangles stored. Column indices within a row are sorted.
struct SparseSpdSystem {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void apply(const double* x, double* y) const;
  std::vector<double> diagonal() const;

  /// Largest |A_ij - A_ji| over the stored pattern (0 for exact symmetry).
  double symmetry_error() const;
};

enum class Precond { None, Jacobi, IC0 };
enum class KrylovMethod { CG, MINRES };

Precond precond_from_string(const std::string& s);
KrylovMethod krylov_from_string(const std::string& s);

/// Preconditioner handle: identity, diagonal scaling, or a zero-fill
/// incomplete Cholesky factor restricted to the lower-triangular pattern
/// of the matrix. IC0 construction retries with a scaled diagonal shift on
/// pivot breakdown.
class Preconditioner {
public:
  static Preconditioner make(const SparseSpdSystem& a, Precond kind);

  Precond kind() const { return kind_; }
  void apply(const double* r, double* z) const;

private:
  Precond kind_ = Precond::None;
  int n_ = 0;
  std::vector<double> inv_diag_;                    // Jacobi
  std::vector<int> l_row_ptr_, l_col_;              // IC0 factor (lower, CSR)
  std::vector<double> l_val_;
  mutable std::vector<double> work_;
};

struct ResidualSample {
  int iteration;
  double rel_residual;
  double seconds;
};

struct SpdSolveResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Preconditioned CG / MINRES from a warm start. Stops once the relative
/// residual drops below tol and at least min_iters iterations were done;
/// returns the best effort flagged non-converged when max_iters is hit.
/// x holds the warm start on entry and the solution on exit.
SpdSolveResult solve_spd(const SparseSpdSystem& a, std::span<const double> b,
                         std::span<double> x, KrylovMethod method,
                         const Preconditioner& precond, double tol,
                         int min_iters, int max_iters,
                         std::vector<ResidualSample>* log = nullptr);

} // namespace dynpat
