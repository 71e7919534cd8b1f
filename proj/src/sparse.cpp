#include "qstab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "qstab/errors.hpp"

namespace qstab {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

double CsrMatrix::norm_inf() const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += std::abs(val[k]);
    m = std::max(m, s);
  }
  return m;
}

double CsrMatrix::diagonal(int i) const {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
    if (col[k] == i) return val[k];
  }
  return 0.0;
}

CsrMatrix assemble_operator(const Grid& grid, std::span<const double> extra,
                            const std::vector<char>* pinned) {
  const int n = static_cast<int>(grid.size());
  auto is_pinned = [&](int i) { return pinned != nullptr && (*pinned)[i] != 0; };

  std::vector<std::map<int, double>> rows(n);
  for (int i = 0; i < n; ++i) rows[i][i] = is_pinned(i) ? 1.0 : extra[i];
  for (const Edge& e : grid.edges()) {
    if (is_pinned(e.i)) continue;
    rows[e.i][e.i] += e.c;
    if (e.j < 0) continue;
    if (is_pinned(e.j)) continue;
    rows[e.j][e.j] += e.c;
    rows[e.i][e.j] -= e.c;
    rows[e.j][e.i] -= e.c;
  }
  // Edges into a pinned node still load the free endpoint's diagonal.
  for (const Edge& e : grid.edges()) {
    if (e.j >= 0 && is_pinned(e.i) && !is_pinned(e.j)) rows[e.j][e.j] += e.c;
  }

  CsrMatrix a;
  a.n = n;
  a.row_ptr.reserve(n + 1);
  a.row_ptr.push_back(0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, v] : rows[i]) {
      a.col.push_back(j);
      a.val.push_back(v);
    }
    a.row_ptr.push_back(static_cast<int>(a.col.size()));
  }
  return a;
}

// ---------------------------------------------------------------------------

IncompleteCholesky::IncompleteCholesky(const CsrMatrix& a) : n_(a.n) {
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    if (factor(a, shift)) {
      shift_ = shift;
      return;
    }
    shift = shift == 0.0 ? 1e-3 : shift * 10.0;
  }
  // Jacobi fallback.
  row_ptr_.assign(n_ + 1, 0);
  col_.clear();
  val_.clear();
  diag_.resize(n_);
  for (int i = 0; i < n_; ++i) diag_[i] = std::sqrt(std::max(std::abs(a.diagonal(i)), 1e-300));
  shift_ = -1.0;
}

bool IncompleteCholesky::factor(const CsrMatrix& a, double shift) {
  row_ptr_.assign(1, 0);
  col_.clear();
  val_.clear();
  diag_.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const int start = static_cast<int>(col_.size());
    double aii = 0.0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const int j = a.col[k];
      if (j == i) {
        aii = a.val[k] * (1.0 + shift);
        continue;
      }
      if (j > i) continue;
      // L_ij = (a_ij - sum_{m<j} L_im L_jm) / L_jj over the shared pattern.
      double s = a.val[k];
      int p = start;
      int q = row_ptr_[j];
      const int pe = static_cast<int>(col_.size());
      const int qe = row_ptr_[j + 1];
      while (p < pe && q < qe) {
        if (col_[p] == col_[q]) {
          s -= val_[p] * val_[q];
          ++p;
          ++q;
        } else if (col_[p] < col_[q]) {
          ++p;
        } else {
          ++q;
        }
      }
      col_.push_back(j);
      val_.push_back(s / diag_[j]);
    }
    double d = aii;
    for (int p = start; p < static_cast<int>(col_.size()); ++p) d -= val_[p] * val_[p];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    diag_[i] = std::sqrt(d);
    row_ptr_.push_back(static_cast<int>(col_.size()));
  }
  return true;
}

void IncompleteCholesky::apply(std::span<const double> r, std::span<double> z) const {
  std::vector<double> y(r.begin(), r.end());
  for (int i = 0; i < n_; ++i) {
    double s = y[i];
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s -= val_[p] * y[col_[p]];
    y[i] = s / diag_[i];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const double zi = y[i] / diag_[i];
    z[i] = zi;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[col_[p]] -= val_[p] * zi;
  }
}

// ---------------------------------------------------------------------------

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgResult pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
             const IncompleteCholesky& m, double tol, int max_iterations) {
  const std::size_t n = b.size();
  CgResult res;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  auto true_residual = [&]() {
    a.multiply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    return std::sqrt(dot(r, r)) / bnorm;
  };
  res.relative_residual = true_residual();
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  // Round-off can stall the iteration above tol; keep the best iterate seen.
  std::vector<double> best(x.begin(), x.end());
  double best_res = res.relative_residual;
  int since_best = 0;

  m.apply(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0) || !(rz > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    res.iterations = it;
    double rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= tol || it % 50 == 0) {
      rel = true_residual();
      if (rel <= tol) {
        res.relative_residual = rel;
        res.converged = true;
        return res;
      }
    }
    if (!std::isfinite(rel)) break;
    if (rel < best_res) {
      best_res = rel;
      std::copy(x.begin(), x.end(), best.begin());
      since_best = 0;
    } else if (++since_best > 200) {
      break;
    }
    m.apply(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::copy(best.begin(), best.end(), x.begin());
  res.relative_residual = true_residual();
  // Below tol, or at the round-off floor: normwise backward error of a few
  // hundred ulps relative to |A| |x| + |b|.
  const double floor = 256.0 * std::numeric_limits<double>::epsilon() *
                       (a.norm_inf() * std::sqrt(dot(x, x)) + bnorm);
  res.converged = res.relative_residual <= tol || res.relative_residual * bnorm <= floor;
  return res;
}

std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> b, double tol,
                              int max_iterations, CgResult* info) {
  std::vector<double> x(b.size(), 0.0);
  const IncompleteCholesky m(a);
  const CgResult res = pcg(a, b, x, m, tol, max_iterations);
  if (info != nullptr) *info = res;
  if (!res.converged) {
    throw ConvergenceError("conjugate gradients stopped at relative residual " +
                           std::to_string(res.relative_residual) + " after " +
                           std::to_string(res.iterations) + " iterations");
  }
  return x;
}

}  // namespace qstab
