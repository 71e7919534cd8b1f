#include <cmath>
#include <vector>

#include "doctest.h"
#include "qstab/errors.hpp"
#include "qstab/stability.hpp"

using namespace qstab;

namespace {

GridPtr unit_interval(int n) { return Grid::make(Domain::interval(), {n}); }

GridFunction bump(const GridPtr& g, double center) {
  return GridFunction::sample(g, [center](auto x) { return std::exp(-80 * (x[0] - center) * (x[0] - center)); });
}

SourceTerm power_tail(const GridPtr& g) {
  return {GridFunction::sample(g, [](auto x) { return std::pow(1 + x[0] * x[0], -1.5); })};
}

}  // namespace

TEST_CASE("max stability at and around the extremal") {
  const auto g = unit_interval(255);
  const SourceTerm f{GridFunction::constant(g, 1.0)};
  for (double p : {1.5, 2.0, 3.0}) {
    const MaxExtremal ex = minimize_G(p, f);
    for (MaxFlavor fl : {MaxFlavor::primary, MaxFlavor::alternate}) {
      const auto at = verify_max_stability(ex.V0, ex, f, fl);
      CHECK(std::abs(at.gap) <= 1e-9);
      CHECK(at.remainder <= 1e-12);
      CHECK(at.passed);

      const Potential V = project_max_constraint({ex.V0.values + 0.1 * bump(g, 0.3)}, p);
      const auto r = verify_max_stability(V, ex, f, fl);
      CHECK(r.gap > 0.0);
      CHECK(r.passed);
      CHECK(r.branch == "main");
      CHECK(r.remainder <= r.remainder_bound);
    }
    const auto prim = verify_max_stability(ex.V0, ex, f);
    CHECK(prim.exponent == 2.0);
    CHECK(prim.sigma == (p >= 2 ? sigma_M_prime(p, ex.c1) : sigma_M_doubleprime(p, ex.c1)));
  }
}

TEST_CASE("max stability for the indicator family") {
  const auto g = unit_interval(255);
  const SourceTerm f{GridFunction::constant(g, 1.0)};
  const MaxExtremal ex = minimize_G(2.0, f);
  const Potential V = indicator_potential(g, [](auto x) { return x[0] > 0.25 && x[0] < 0.75; }, 2.0);
  CHECK(lp_norm(V.values, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  const auto r = verify_max_stability(V, ex, f);
  CHECK(r.gap > 0.0);
  CHECK(r.margin > 0.0);
  CHECK(r.passed);
  CHECK_THROWS_AS(verify_max_stability({2.0 * V.values}, ex, f), InvalidInput);
}

TEST_CASE("max stability random sweep including sign-changing potentials") {
  const auto g = unit_interval(127);
  const SourceTerm f{GridFunction::sample(g, [](auto x) { return 1.0 + std::sin(5 * x[0]); })};
  for (double p : {1.5, 2.0, 3.0}) {
    const MaxExtremal ex = minimize_G(p, f);
    Rng rng(static_cast<std::uint64_t>(p * 100));
    int signed_count = 0;
    for (int k = 0; k < 20; ++k) {
      const Potential V = random_max_potential(g, rng, p);
      if (V.values.min() < 0.0) ++signed_count;
      for (MaxFlavor fl : {MaxFlavor::primary, MaxFlavor::alternate}) {
        const auto r = verify_max_stability(V, ex, f, fl);
        CHECK(r.gap >= -1e-9);
        CHECK(r.passed);
      }
    }
    CHECK(signed_count > 0);
  }
}

TEST_CASE("min stability at, around and away from the extremal") {
  const auto g = unit_interval(255);
  const SourceTerm f{GridFunction::constant(g, 1.0)};
  for (double p : {1.5, 2.0, 3.0}) {
    const MinExtremal ex = minimize_J(p, f);
    const ConstantsMin c = constants_min(ex, f);
    const auto at = verify_min_stability(ex.W0, ex, c, f);
    CHECK(std::abs(at.gap) <= 1e-9);
    CHECK(at.remainder <= 1e-12);
    CHECK(at.passed);
    CHECK(at.exponent == beta_exponent(p));

    const ReciprocalPotential W = saturate_min_constraint({ex.W0.values + 0.05 * bump(g, 0.6)}, p);
    const auto r = verify_min_stability(W, ex, c, f);
    CHECK(r.gap > 0.0);
    CHECK(r.passed);
    CHECK(r.remainder <= r.remainder_bound);

    const ReciprocalPotential E = indicator_reciprocal(g, [](auto x) { return x[0] > 0.25 && x[0] < 0.75; }, p);
    const auto ri = verify_min_stability(E, ex, c, f);
    CHECK(ri.gap > 0.0);
    CHECK(ri.margin > 0.0);
  }
}

TEST_CASE("min stability sweep on the radial grid with a power-tail source") {
  const auto g = Grid::make(Domain::radial3d(20.0), {400});
  const SourceTerm f = power_tail(g);
  for (double p : {1.5, 2.0, 3.0}) {
    const MinExtremal ex = minimize_J(p, f);
    const ConstantsMin c = constants_min(ex, f);
    CHECK(c.sobolev_exponent == 6.0);
    Rng rng(static_cast<std::uint64_t>(p * 10));
    for (int k = 0; k < 10; ++k) {
      const auto r = verify_min_stability(random_min_reciprocal(g, rng, p), ex, c, f);
      CHECK(r.gap >= -1e-9);
      CHECK(r.passed);
    }
  }
}

TEST_CASE("state-function stability") {
  const auto g = unit_interval(255);
  const SourceTerm f{GridFunction::constant(g, 1.0)};
  for (double p : {1.5, 2.0, 3.0}) {
    const MaxExtremal ex = minimize_G(p, f);
    const auto at = verify_max_state_stability(ex.V0, ex, f);
    CHECK(at.weak_lhs <= 1e-12);
    CHECK(std::abs(at.weak_rhs) <= 1e-9);
    CHECK(at.passed);
    Rng rng(5);
    for (int k = 0; k < 5; ++k) {
      const auto r = verify_max_state_stability(random_max_potential(g, rng, p), ex, f);
      CHECK(r.weak_passed);
      CHECK(r.strong_passed);
      CHECK(r.weak_lhs > 0.0);
    }

    const MinExtremal mx = minimize_J(p, f);
    const ConstantsMin c = constants_min(mx, f);
    const auto mat = verify_min_state_stability(mx.W0, mx, c, f);
    CHECK(mat.passed);
    CHECK(mat.rhs <= 1e-12);
    for (int k = 0; k < 5; ++k) {
      const auto r = verify_min_state_stability(random_min_reciprocal(g, rng, p), mx, c, f);
      CHECK(r.passed);
      CHECK(r.corner_checked);
      CHECK(r.corner_passed);
    }
  }
}

TEST_CASE("radial Sobolev form of the state estimate at p = 3/2") {
  const auto g = Grid::make(Domain::radial3d(20.0), {400});
  const SourceTerm f = power_tail(g);
  const MaxExtremal ex = minimize_G(1.5, f);
  Rng rng(9);
  for (int k = 0; k < 5; ++k) {
    const auto r = verify_max_state_stability(random_max_potential(g, rng, 1.5), ex, f);
    CHECK(r.sobolev_form_checked);
    CHECK(r.passed);
  }
}

TEST_CASE("scaling probe shows quadratic detachment") {
  const auto g = unit_interval(255);
  const SourceTerm f{GridFunction::constant(g, 1.0)};
  const MaxExtremal ex = minimize_G(2.0, f);
  const std::vector<double> eps = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
  const SolverOptions tight{1e-12, 100000};
  const auto probe = scaling_probe(hadamard(ex.V0.values, bump(g, 0.4)), ex, f, eps, tight);
  CHECK(probe.slope >= 1.8);
  CHECK(probe.slope <= 2.2);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double a = probe.remainders_primary[i] / eps[i];
    const double b = probe.remainders_alternate[i] / eps[i];
    CHECK(a > 1e-3);
    CHECK(a < 1e3);
    CHECK(b > 1e-3);
    CHECK(b < 1e3);
    CHECK(probe.margins[i] >= -1e-9);
  }
  const std::vector<double> zero = {0.0};
  const auto z = scaling_probe(bump(g, 0.4), ex, f, zero);
  CHECK(std::abs(z.gaps[0]) <= 1e-9);

  const MinExtremal mx = minimize_J(2.0, f);
  const auto mp = scaling_probe(hadamard(mx.W0.values, bump(g, 0.4)), mx, constants_min(mx, f), f, eps, tight);
  CHECK(mp.slope >= 1.8);
  CHECK(mp.slope <= 2.2);
}
