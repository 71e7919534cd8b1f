#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qstab/errors.hpp"
#include "qstab/grid.hpp"
#include "qstab/random_fields.hpp"

using namespace qstab;
using std::numbers::pi;

namespace {

GridPtr unit_interval(int n) { return Grid::make(Domain::interval(), {n}); }

GridFunction quadratic(const GridPtr& g) {
  return GridFunction::sample(g, [](auto x) { return x[0] * (1.0 - x[0]) / 2.0; });
}

GridFunction sine(const GridPtr& g) {
  return GridFunction::sample(g, [](auto x) { return std::sin(pi * x[0]); });
}

std::vector<GridPtr> all_kinds() {
  return {unit_interval(40), Grid::make(Domain::box2d(1.0, 2.0), {12, 15}),
          Grid::make(Domain::box3d(), {9, 10, 11}), Grid::make(Domain::radial3d(5.0), {60})};
}

}  // namespace

TEST_CASE("grid construction rejects bad input") {
  CHECK_THROWS_AS(Grid::make(Domain::interval(), {7}), InvalidInput);
  CHECK_THROWS_AS(Grid::make(Domain::interval(-1.0), {16}), InvalidInput);
  CHECK_THROWS_AS(Grid::make(Domain::box2d(), {16}), InvalidInput);
  CHECK_THROWS_AS(Grid::make(Domain::radial3d(0.0), {16}), InvalidInput);
  CHECK(Grid::make(Domain::radial3d(), {16})->dimension() == 3);
}

TEST_CASE("lp_norm examples") {
  const auto g = unit_interval(255);
  CHECK(lp_norm(GridFunction(g), 2.0) == 0.0);
  const double h = g->spacing(0);
  // Interior nodes cover measure 1 - h.
  CHECK(lp_norm(GridFunction::constant(g, 1.0), 3.0) == doctest::Approx(1.0).epsilon(2 * h));
  const double exact = oracle::simpson([](double x) { return x * (1 - x) / 2; }, 0.0, 1.0);
  CHECK(exact == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(lp_norm(quadratic(g), 1.0) == doctest::Approx(exact).epsilon(1e-5));

  GridFunction bad = GridFunction::constant(g, 1.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(lp_norm(bad, 2.0), InvalidInput);
  CHECK_THROWS_AS(lp_norm(quadratic(g), 0.0), InvalidInput);
}

TEST_CASE("h1_seminorm examples and convergence") {
  const auto g = unit_interval(255);
  CHECK(h1_seminorm(GridFunction(g)) == 0.0);
  const double q_exact = std::sqrt(oracle::simpson([](double x) { return (0.5 - x) * (0.5 - x); }, 0, 1));
  CHECK(q_exact == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-12));
  CHECK(h1_seminorm(quadratic(g)) == doctest::Approx(q_exact).epsilon(g->spacing(0)));

  const double s_exact = pi / std::sqrt(2.0);
  CHECK(h1_seminorm(sine(g)) == doctest::Approx(s_exact).epsilon(1e-4));

  // Measured order on sin(pi x): error ratio about 4 per doubling.
  double prev = 0.0;
  for (int n : {31, 63, 127, 255}) {
    const auto gg = unit_interval(n);
    const double err = std::abs(h1_seminorm(sine(gg)) - s_exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("apply_laplacian examples") {
  const auto g = unit_interval(255);
  CHECK(apply_laplacian(GridFunction(g)).max_abs() == 0.0);
  const GridFunction lq = apply_laplacian(quadratic(g));
  for (std::size_t i = 0; i < lq.size(); ++i) CHECK(lq[i] == doctest::Approx(1.0).epsilon(1e-8));

  const GridFunction s = sine(g);
  const GridFunction ls = apply_laplacian(s);
  const double h = g->spacing(0);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    CHECK(std::abs(ls[i] - pi * pi * s[i]) <= pi * pi * pi * pi * h * h / 12.0 + 1e-9);
  }
}

TEST_CASE("radial laplacian is exact on rho^2 away from the truncation") {
  const auto g = Grid::make(Domain::radial3d(4.0), {64});
  const GridFunction u = GridFunction::sample(g, [](auto x) { return x[0] * x[0]; });
  const GridFunction lu = apply_laplacian(u);
  // -Laplacian of rho^2 in three dimensions is -6, origin included.
  for (std::size_t i = 0; i + 1 < lu.size(); ++i) CHECK(lu[i] == doctest::Approx(-6.0).epsilon(1e-9));

  // Smooth profile: second-order agreement with the analytic radial operator.
  double prev = 0.0;
  for (int n : {100, 200, 400}) {
    const auto gg = Grid::make(Domain::radial3d(10.0), {n});
    const GridFunction v = GridFunction::sample(gg, [](auto x) { return std::exp(-x[0] * x[0]); });
    const GridFunction lv = apply_laplacian(v);
    double err = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const double r = gg->coordinate(i, 0);
      const double exact = (6.0 - 4.0 * r * r) * std::exp(-r * r);
      err = std::max(err, std::abs(lv[i] - exact));
    }
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}

TEST_CASE("inner examples") {
  const auto g = unit_interval(255);
  const GridFunction one = GridFunction::constant(g, 1.0);
  CHECK(inner(one, GridFunction(g)) == 0.0);
  CHECK(inner(one, one) == doctest::Approx(1.0).epsilon(2 * g->spacing(0)));
  // Discrete orthogonality makes this exact on the vertex grid.
  CHECK(inner(sine(g), sine(g)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(inner(one, GridFunction::constant(unit_interval(64), 1.0)), InvalidInput);
}

TEST_CASE("radial weights integrate the ball volume") {
  const auto g = Grid::make(Domain::radial3d(2.0), {50});
  const double h = g->spacing(0);
  const double r = 2.0 - 0.5 * h;
  CHECK(g->measure() == doctest::Approx(4.0 / 3.0 * pi * r * r * r).epsilon(1e-12));
}

TEST_CASE("norm homogeneity and triangle inequality on random fields") {
  Rng rng(7);
  for (const auto& g : all_kinds()) {
    for (int trial = 0; trial < 10; ++trial) {
      const GridFunction u = random_smooth_field(g, rng);
      const GridFunction v = random_smooth_field(g, rng, false);
      for (double s : {1.0, 1.5, 2.0, 3.0, 6.0}) {
        for (double t : {-3.0, 0.25, 7.5}) {
          CHECK(lp_norm(t * u, s) == doctest::Approx(std::abs(t) * lp_norm(u, s)).epsilon(1e-13));
        }
        CHECK(lp_norm(u + v, s) <= lp_norm(u, s) + lp_norm(v, s) + 1e-14);
      }
    }
  }
}

TEST_CASE("discrete integration by parts holds to machine precision") {
  Rng rng(11);
  for (const auto& g : all_kinds()) {
    for (int trial = 0; trial < 10; ++trial) {
      const GridFunction u = random_smooth_field(g, rng, trial % 2 == 0);
      const GridFunction v = random_smooth_field(g, rng, trial % 3 == 0);
      const double luv = inner(apply_laplacian(u), v);
      const double ulv = inner(u, apply_laplacian(v));
      const double scale = h1_seminorm(u) * h1_seminorm(v);
      CHECK(std::abs(luv - ulv) <= 1e-13 * scale);
      const double h1 = h1_seminorm(u);
      CHECK(std::abs(inner(apply_laplacian(u), u) - h1 * h1) <= 1e-13 * h1 * h1);
    }
  }
}

TEST_CASE("stencil agrees with the textbook three-point matrix") {
  const int n = 20;
  const auto g = unit_interval(n);
  Rng rng(3);
  const GridFunction u = random_smooth_field(g, rng);
  const auto a = oracle::interval_operator(n, 1.0, std::vector<double>(n, 0.0));
  const GridFunction lu = apply_laplacian(u);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a[i][j] * u[j];
    CHECK(lu[i] == doctest::Approx(s).epsilon(1e-12));
  }
}
