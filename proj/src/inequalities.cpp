#include "qstab/inequalities.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qstab/errors.hpp"

namespace qstab {

namespace {

constexpr double kRenormalize = 1e-6;

GridFunction unit_normalized(const GridFunction& u, double s, const char* what) {
  if (!u.grid() || !u.finite()) throw InvalidInput(std::string(what) + " must be finite");
  const double n = lp_norm(u, s);
  if (std::abs(n - 1.0) > kRenormalize) {
    throw InvalidInput(std::string(what) + " must have unit norm (got " + std::to_string(n) + ")");
  }
  return u * (1.0 / n);
}

double conjugate(double q) { return q / (q - 1.0); }

}  // namespace

DeficitReport make_deficit_report(double deficit, double remainder, double constant) {
  DeficitReport r;
  r.deficit = deficit;
  r.remainder = remainder;
  r.constant = constant;
  r.margin = deficit - constant * remainder;
  r.passed = r.margin >= -10.0 * kQuadratureTol;
  return r;
}

DeficitReport quantitative_holder(const GridFunction& f, const GridFunction& g, double q, int form) {
  if (!std::isfinite(q)) throw InvalidInput("no quantitative Holder inequality exists for q = inf");
  if (!(q >= 2.0)) throw InvalidInput("quantitative Holder inequality needs q >= 2");
  if (form != 1 && form != 2) throw InvalidInput("form must be 1 or 2");
  require_same_grid(f, g);
  const double qp = conjugate(q);
  const GridFunction fn = unit_normalized(f, q, "f");
  const GridFunction gn = unit_normalized(g, qp, "g");
  // The signed pairing: 1 - int f g dominates 1 - |int f g|, and the bound
  // fails with the absolute value for g = -|f|^{q-2} f.
  const double deficit = 1.0 - inner(fn, gn);
  if (form == 1) {
    const double r = lp_norm(signed_power(fn, q) - gn, qp);
    return make_deficit_report(deficit, r * r, (qp - 1.0) / 4.0);
  }
  const double r = lp_integral(fn - signed_power(gn, qp), q);
  return make_deficit_report(deficit, r, 1.0 / (q * std::pow(2.0, q - 1.0)));
}

DeficitReport clarkson_check(const GridFunction& h1, const GridFunction& h2, double q) {
  if (!(q > 1.0 && q <= 2.0)) throw InvalidInput("Clarkson check needs 1 < q <= 2");
  require_same_grid(h1, h2);
  const GridFunction a = unit_normalized(h1, q, "h1");
  const GridFunction b = unit_normalized(h2, q, "h2");
  const double qp = conjugate(q);
  const double plus = std::pow(lp_norm(0.5 * (a + b), q), qp);
  const double minus = std::pow(lp_norm(0.5 * (a - b), q), qp);
  return make_deficit_report(1.0 - plus, minus, 1.0);
}

double strauss_constant(double q, int N) {
  if (!(q > 0.0)) throw InvalidInput("Strauss bound needs q > 0");
  if (N < 2) throw InvalidInput("Strauss bound needs N >= 2");
  const double n = N;
  // N omega_N is the surface measure of the unit sphere in R^N.
  const double surface = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
  const double s = (2.0 + q) / (2.0 * surface);
  return s * s;
}

DeficitReport strauss_bound(const GridFunction& u, double q) {
  if (!u.grid() || !u.grid()->radial()) throw InvalidInput("Strauss bound needs a radial grid");
  if (!u.finite()) throw InvalidInput("function must be finite");
  const Grid& grid = *u.grid();
  const int N = grid.dimension();
  const double S = strauss_constant(q, N);
  const double h1 = h1_seminorm(u);
  const double energy = S * h1 * h1 * lp_integral(u, q);
  double worst_ratio = -1.0;
  double bound = 0.0, lhs = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = grid.coordinate(i, 0);
    if (rho <= 0.0) continue;
    const double b = energy * std::pow(rho, -2.0 * (N - 1));
    const double l = std::pow(std::abs(u[i]), 2.0 + q);
    const double ratio = b > 0.0 ? l / b : (l > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      bound = b;
      lhs = l;
    }
  }
  return make_deficit_report(bound, lhs, 1.0);
}

DeficitReport norm_lower_triangle(const GridFunction& g, const GridFunction& g0, double r, double s) {
  if (!(r > 1.0) || !(s > 1.0) || !std::isfinite(r) || !std::isfinite(s)) {
    throw InvalidInput("triangle estimate needs 1 < r, s < inf");
  }
  require_same_grid(g, g0);
  if (!g.finite() || !g0.finite()) throw InvalidInput("functions must be finite");
  if (g0.is_zero()) throw InvalidInput("g0 must not vanish identically");
  const double n0 = lp_norm(g0, r);
  const GridFunction pw = g0.map([r](double x) { return std::pow(std::abs(x), r - 1.0); });
  const double factor = lp_norm(pw, conjugate(s)) / std::pow(n0, r - 1.0);
  return make_deficit_report(lp_norm(g, r) - n0, lp_norm(g - g0, s), -factor);
}

ReductionReport reduction(const ReciprocalPotential& W, const SourceTerm& f, const MinExtremal& ex,
                          double beta, const SolverOptions& opts) {
  if (!(beta > 0.0)) throw InvalidInput("reduction needs beta > 0");
  require_same_grid(W.values, ex.W0.values);
  if (!W.values.nonnegative()) throw InvalidInput("reciprocal potential must be nonnegative");
  if (W.values.is_zero()) throw InvalidInput("reciprocal potential must not vanish identically");
  const double p = ex.p;
  ReductionReport rep;
  rep.lambda = lp_norm(W.values, p);
  if (rep.lambda > 1.0 + kRenormalize) {
    throw InvalidInput("reduction needs |W|_p <= 1 (got " + std::to_string(rep.lambda) + ")");
  }
  rep.U = {W.values * (1.0 / rep.lambda)};
  const EnergyResult sv = solve_state(W, f, opts);
  const EnergyResult su = solve_state(rep.U, f, opts);
  rep.weighted_integral = reciprocal_weighted_integral(W, sv.state);
  rep.hypothesis_holds = rep.weighted_integral >= beta;
  rep.gap = sv.energy - ex.energy;
  rep.monotonicity = make_deficit_report(rep.gap, su.energy - ex.energy, 1.0);
  const double far = lp_norm(W.values - ex.W0.values, p);
  const double near = lp_norm(rep.U.values - ex.W0.values, p);
  rep.distance = make_deficit_report(2.0 / beta * rep.gap, far - near, 1.0);
  return rep;
}

}  // namespace qstab
