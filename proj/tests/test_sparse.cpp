#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qstab/random_fields.hpp"
#include "qstab/sparse.hpp"

using namespace qstab;

TEST_CASE("assembled operator matches the edge form") {
  const auto g = Grid::make(Domain::box2d(), {9, 12});
  Rng rng(5);
  const GridFunction u = random_smooth_field(g, rng);
  const CsrMatrix a = assemble_operator(*g, std::vector<double>(g->size(), 0.0));
  std::vector<double> au(g->size()), ku(g->size());
  a.multiply(u.values(), au);
  stiffness_apply(*g, u.values(), ku);
  for (std::size_t i = 0; i < au.size(); ++i) CHECK(au[i] == doctest::Approx(ku[i]).epsilon(1e-13));
  // symmetric storage
  for (int i = 0; i < a.n; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const int j = a.col[k];
      double aji = 0.0;
      for (int m = a.row_ptr[j]; m < a.row_ptr[j + 1]; ++m) {
        if (a.col[m] == i) aji = a.val[m];
      }
      CHECK(aji == a.val[k]);
    }
  }
}

TEST_CASE("pcg agrees with dense elimination") {
  const int n = 30;
  const auto g = Grid::make(Domain::interval(), {n});
  Rng rng(9);
  const GridFunction v = random_smooth_field(g, rng, false).map([](double x) { return std::abs(x) * 10; });
  const GridFunction f = random_smooth_field(g, rng);
  std::vector<double> extra(n);
  for (int i = 0; i < n; ++i) extra[i] = g->weight(i) * v[i];
  const CsrMatrix a = assemble_operator(*g, extra);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = g->weight(i) * f[i];
  CgResult info;
  const auto x = solve_spd(a, b, 1e-13, 1000, &info);
  CHECK(info.converged);
  CHECK(info.iterations <= 2);  // incomplete Cholesky is exact on tridiagonal matrices

  const auto dense = oracle::interval_operator(n, 1.0, v.values());
  const auto y = oracle::dense_solve(dense, f.values());
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-10));
}

TEST_CASE("pcg on the square and the cube converges to tolerance") {
  for (const auto& g : {Grid::make(Domain::box2d(), {40, 40}), Grid::make(Domain::box3d(), {12, 12, 12})}) {
    Rng rng(2);
    const GridFunction f = random_smooth_field(g, rng);
    const CsrMatrix a = assemble_operator(*g, std::vector<double>(g->size(), 0.0));
    std::vector<double> b(g->size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = g->weight(i) * f[i];
    CgResult info;
    const auto x = solve_spd(a, b, 1e-12, 10000, &info);
    std::vector<double> ax(b.size());
    a.multiply(x, ax);
    double r = 0, bn = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      r += (ax[i] - b[i]) * (ax[i] - b[i]);
      bn += b[i] * b[i];
    }
    CHECK(std::sqrt(r / bn) <= 1e-12);
  }
}

TEST_CASE("pinned nodes are eliminated symmetrically") {
  const int n = 12;
  const auto g = Grid::make(Domain::interval(), {n});
  std::vector<char> pinned(n, 0);
  pinned[4] = pinned[5] = 1;
  const CsrMatrix a = assemble_operator(*g, std::vector<double>(n, 0.0), &pinned);
  std::vector<double> b(n, 1.0);
  b[4] = b[5] = 0.0;
  const auto x = solve_spd(a, b, 1e-14, 100);
  CHECK(x[4] == 0.0);
  CHECK(x[5] == 0.0);
  // Each side is an independent Dirichlet problem on its own interval.
  const double h = g->spacing(0);
  std::vector<double> left(4, 0.0), right(6, 0.0);
  const auto dl = oracle::interval_operator(4, 5 * h, left);
  const auto yl = oracle::dense_solve(dl, std::vector<double>(4, 1.0 / h));
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(yl[i]).epsilon(1e-10));
  const auto dr = oracle::interval_operator(6, 7 * h, right);
  const auto yr = oracle::dense_solve(dr, std::vector<double>(6, 1.0 / h));
  for (int i = 0; i < 6; ++i) CHECK(x[6 + i] == doctest::Approx(yr[i]).epsilon(1e-10));
}
