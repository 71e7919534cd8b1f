#pragma once

#include <span>
#include <vector>

#include "qstab/grid.hpp"

namespace qstab {

// Symmetric matrix in CSR form with both triangles stored, columns sorted.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
  double diagonal(int i) const;
  double norm_inf() const;
};

// Stiffness matrix of the grid plus diag(extra) (extra is already in
// coefficient space, i.e. multiplied by the quadrature weights). Nodes with
// pinned[i] != 0 are eliminated: their row and column become the identity.
CsrMatrix assemble_operator(const Grid& grid, std::span<const double> extra,
                            const std::vector<char>* pinned = nullptr);

// Zero-fill incomplete Cholesky factor. Exact for tridiagonal matrices.
// Falls back to a diagonally shifted factorization on pivot breakdown.
class IncompleteCholesky {
public:
  explicit IncompleteCholesky(const CsrMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const;
  double shift() const { return shift_; }

private:
  bool factor(const CsrMatrix& a, double shift);

  int n_ = 0;
  std::vector<int> row_ptr_;  // strictly lower part of L
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<double> diag_;
  double shift_ = 0.0;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients on A x = b; x holds the initial guess.
CgResult pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
             const IncompleteCholesky& m, double tol, int max_iterations);

// Convenience: factor and solve from a zero initial guess; throws
// ConvergenceError when neither the tolerance nor the round-off floor is
// reached.
std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> b, double tol,
                              int max_iterations, CgResult* info = nullptr);

}  // namespace qstab
