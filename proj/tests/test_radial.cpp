#include <cmath>

#include "doctest.h"
#include "qstab/errors.hpp"
#include "qstab/radial.hpp"
#include "qstab/random_fields.hpp"

using namespace qstab;

namespace {

GridPtr radial(double R, int n) { return Grid::make(Domain::radial3d(R), {n}); }

RadialProblem tail_problem(const GridPtr& g, double C = 1.0, double q = 1.5) {
  return make_radial_problem(power_tail_source(g, C, 3.0), q, 1.0, 3.0, 1.0);
}

// -Delta u* + a u*^{q-1} for u* = (1+rho^2)^{-2} in three dimensions.
GridFunction manufactured_source(const GridPtr& g, double q, double a) {
  return GridFunction::sample(g, [q, a](auto x) {
    const double s = x[0] * x[0];
    return 12.0 * (1.0 - s) / std::pow(1.0 + s, 4) + a * std::pow(1.0 + s, -2.0 * (q - 1.0));
  });
}

double max_error_to_manufactured(const GridFunction& u) {
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = u.grid()->coordinate(i, 0);
    err = std::max(err, std::abs(u[i] - std::pow(1.0 + r * r, -2.0)));
  }
  return err;
}

}  // namespace

TEST_CASE("zero source gives the zero solution") {
  const auto g = radial(20.0, 256);
  const auto prob = make_radial_problem(GridFunction(g), 1.5, 1.0, 3.0, 1.0);
  CHECK(solve_semilinear_radial(prob).is_zero());
}

TEST_CASE("discretely manufactured solution is recovered to solver tolerance") {
  const auto g = radial(20.0, 1024);
  const GridFunction ustar = GridFunction::sample(g, [](auto x) { return std::pow(1.0 + x[0] * x[0], -2.0); });
  for (double q : {1.25, 1.5, 1.75}) {
    RadialProblem zero = make_radial_problem(GridFunction(g), q, 2.0, 3.0, 1.0);
    const GridFunction f = semilinear_residual(zero, ustar);
    const auto prob = make_radial_problem(f, q, 2.0, 4.0 * (q - 1.0), 1.0);
    const double tol = 1e-10;
    const GridFunction u = solve_semilinear_radial(prob, tol);
    CHECK((u - ustar).max_abs() <= 10 * tol);
    CHECK(semilinear_residual(prob, u).max_abs() <= 1e-8);
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const double q = 1.5;
  double prev = 0.0;
  for (int n : {512, 1024, 2048, 4096}) {
    const auto g = radial(20.0, n);
    const auto prob = make_radial_problem(manufactured_source(g, q, 1.0), q, 1.0, 2.0, 1.0);
    const double err = max_error_to_manufactured(solve_semilinear_radial(prob));
    if (prev > 0.0) {
      const double order = std::log2(prev / err);
      CHECK(order > 1.8);
      CHECK(order < 2.2);
    }
    prev = err;
    if (n == 4096) CHECK(err <= 1e-4);
  }
}

TEST_CASE("power-tail solve: positive, decreasing, sharp decay") {
  const auto g = radial(40.0, 4096);
  const auto prob = tail_problem(g);
  CHECK(prob.b == doctest::Approx(1.0).epsilon(1e-3));
  require_decay_hypothesis(prob);
  const GridFunction u = solve_semilinear_radial(prob);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    CHECK(u[i] > 0.0);
    CHECK(u[i + 1] <= u[i]);
  }
  const DecayFit fit = decay_fit(u, prob);
  CHECK(fit.lo == 2.0);
  CHECK(fit.hi == 32.0);
  CHECK(fit.expected_slope == -6.0);
  CHECK(fit.slope_ok);
  CHECK(fit.power_law);
  CHECK(std::abs(fit.slope + 6.0) <= 0.1);
  CHECK(strauss_bound(u, prob.q).passed);
}

TEST_CASE("decay fit controls") {
  const auto g = radial(40.0, 4096);
  const auto prob = tail_problem(g);
  const GridFunction power = GridFunction::sample(g, [](auto x) { return x[0] > 0 ? std::pow(x[0], -6.0) : 1.0; });
  const DecayFit exact = decay_fit(power, prob);
  CHECK(exact.slope == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(exact.rms <= 1e-10);
  const DecayFit expo = decay_fit(GridFunction::sample(g, [](auto x) { return std::exp(-x[0]); }), prob);
  CHECK(!expo.power_law);
  CHECK(expo.rms > 1.0);
  CHECK_THROWS_AS(decay_fit(GridFunction(g), prob), InvalidInput);
  CHECK_THROWS_AS(decay_fit(power, prob, 10.0, 5.0), InvalidInput);
}

TEST_CASE("L-infinity bound") {
  const auto g = radial(40.0, 2048);
  const auto prob = tail_problem(g);
  const double c2 = c2_from_coefficient(prob);
  CHECK(c2 == 1.0);
  const auto zero = linfty_bound(GridFunction(g), prob, c2);
  CHECK(zero.passed);
  CHECK(zero.max_u == 0.0);
  const GridFunction u = solve_semilinear_radial(prob);
  const auto r = linfty_bound(u, prob, c2);
  CHECK(r.passed);
  CHECK(r.slack >= 0.0);
  CHECK(r.inner_max == u[0]);

  RadialProblem doubled = prob;
  doubled.b *= 2.0;
  const auto r2 = linfty_bound(u, doubled, c2);
  CHECK(std::pow(r2.tail_threshold, prob.q - 1.0) ==
        doctest::Approx(2.0 * std::pow(r.tail_threshold, prob.q - 1.0)).epsilon(1e-13));
}

TEST_CASE("comparison ladder") {
  const auto g = radial(40.0, 2048);
  const auto prob = tail_problem(g);
  const double c2 = c2_from_coefficient(prob);
  const GridFunction w = solve_semilinear_radial(prob);
  const auto same = comparison_against(w, w, prob);
  CHECK(same.found);
  CHECK(same.T == 1.0);
  CHECK(same.passed);

  const auto bigger = tail_problem(g, 3.0);
  const GridFunction u = solve_semilinear_radial(bigger);
  const auto r = comparison_check(u, bigger, c2);
  CHECK(r.found);
  CHECK(r.T > 1.0);
  CHECK(r.worst_ratio <= 1.0);
  CHECK(r.passed);

  const auto small = radial(4.9, 512);
  const auto sp = tail_problem(small, 3.0);
  const auto rs = comparison_check(solve_semilinear_radial(sp), sp, c2);
  CHECK(!rs.passed);
  CHECK(!rs.truncation_adequate);
}

TEST_CASE("weak-decay bootstrap") {
  const auto exps = bootstrap_exponents(3, 1.5, 3.0, 5);
  CHECK(exps[0] == doctest::Approx(8.0 / 7.0).epsilon(1e-15));
  CHECK(std::abs(exps[0] - 1.142857) <= 1e-6);
  for (std::size_t i = 1; i < exps.size(); ++i) {
    CHECK(exps[i] > exps[i - 1]);
    CHECK(exps[i] < 3.0);
  }

  const auto g = radial(40.0, 4096);
  const auto prob = tail_problem(g);
  const auto r = weak_decay_bootstrap(solve_semilinear_radial(prob), prob);
  CHECK(!r.nothing_to_prove);
  CHECK(r.strauss.passed);
  CHECK(r.steps_verified >= 3);
  CHECK(r.deepest > 2.9);

  RadialProblem slow = prob;
  slow.alpha = 1.0;
  const auto rs = weak_decay_bootstrap(solve_semilinear_radial(prob), slow);
  CHECK(rs.nothing_to_prove);
  CHECK(rs.exponents.size() == 1);
}

TEST_CASE("discrete comparison principle and Strauss bound on random sources") {
  const auto g = radial(20.0, 1024);
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    GridFunction f = random_smooth_field(g, rng, false).map([](double x) { return std::abs(x); });
    f = hadamard(f, power_tail_source(g, 1.0, 3.0));
    const GridFunction bigger = f + 0.1 * power_tail_source(g, 1.0, 3.0);
    const auto p1 = make_radial_problem(f, 1.5, 1.0, 3.0, 1.0);
    const auto p2 = make_radial_problem(bigger, 1.5, 1.0, 3.0, 1.0);
    const GridFunction u1 = solve_semilinear_radial(p1);
    const GridFunction u2 = solve_semilinear_radial(p2);
    for (std::size_t i = 0; i < u1.size(); ++i) CHECK(u1[i] <= u2[i] * (1.0 + 1e-10));
    for (double q : {1.0, 2.0, 4.0}) CHECK(strauss_bound(u1, q).passed);
  }
}

TEST_CASE("radial input validation") {
  const auto g = radial(20.0, 128);
  const auto f = power_tail_source(g, 1.0, 3.0);
  CHECK_THROWS_AS(make_radial_problem(f, 2.5, 1.0, 3.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(make_radial_problem(f, 1.5, 0.0, 3.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(make_radial_problem(f, 1.5, 1.0, 3.0, 1.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(require_decay_hypothesis(make_radial_problem(f, 1.5, 1.0, 2.5, 1.0)), InvalidInput);
  CHECK_THROWS_AS(solve_semilinear_radial(make_radial_problem(-f, 1.5, 1.0, 3.0, 1.0)), InvalidInput);
  const auto cart = Grid::make(Domain::interval(), {16});
  CHECK_THROWS_AS(make_radial_problem(GridFunction::constant(cart, 1.0), 1.5, 1.0, 3.0, 1.0), InvalidInput);
}
