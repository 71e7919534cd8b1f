#include "qstab/stability.hpp"

#include <algorithm>
#include <cmath>

#include "qstab/errors.hpp"
#include "qstab/sobolev.hpp"

namespace qstab {

namespace {

constexpr double kConstraintSlack = 1e-9;

StabilityReport make_report(double gap, double remainder, double exponent, double sigma, double tol,
                            std::string branch) {
  StabilityReport r;
  r.gap = gap;
  r.remainder = remainder;
  r.exponent = exponent;
  r.sigma = sigma;
  r.margin = gap - sigma * std::pow(remainder, exponent);
  r.passed = r.margin >= -10.0 * tol;
  r.branch = std::move(branch);
  r.remainder_bound = std::pow((std::max(gap, 0.0) + 10.0 * tol) / sigma, 1.0 / exponent);
  return r;
}

// | |V|^{p-2} V - V0^{p-1} |_{p'}
double dual_distance(const GridFunction& V, const GridFunction& V0, double p) {
  return lp_norm(signed_power(V, p) - signed_power(V0, p), p / (p - 1.0));
}

double node_measure(const GridPtr& grid, const std::function<bool(std::span<const double>)>& in_set,
                    std::vector<char>& mask) {
  mask.assign(grid->size(), 0);
  double m = 0.0;
  const GridFunction probe =
      GridFunction::sample(grid, [&](std::span<const double> x) { return in_set(x) ? 1.0 : 0.0; });
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (probe[i] > 0.0) {
      mask[i] = 1;
      m += grid->weight(i);
    }
  }
  if (!(m > 0.0)) throw InvalidInput("indicator set contains no grid nodes");
  return m;
}

double fitted_slope(const std::vector<double>& eps, const std::vector<double>& gaps) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] > 0.0 && gaps[i] > 0.0) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(gaps[i]));
    }
  }
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

StabilityReport verify_max_stability(const Potential& V, const MaxExtremal& ex, const SourceTerm& f,
                                     MaxFlavor flavor, const SolverOptions& opts) {
  require_same_grid(V.values, ex.V0.values);
  const double p = ex.p;
  const double norm = lp_norm(V.values, p);
  if (norm > 1.0 + kConstraintSlack) {
    throw InvalidInput("potential violates |V|_p <= 1 (norm " + std::to_string(norm) + ")");
  }
  const EnergyResult st = solve_state(V, f, opts);
  const double gap = ex.energy - st.energy;
  const ConstantsMax c = constants_max(ex);
  const std::string branch = gap > c.threshold ? "trivial" : "main";
  const bool high = p >= 2.0;
  if (flavor == MaxFlavor::primary) {
    const double rem = high ? dual_distance(V.values, ex.V0.values, p) : lp_norm(V.values - ex.V0.values, p);
    return make_report(gap, rem, 2.0, high ? c.sigma_M_prime : c.sigma_M_doubleprime, opts.tol, branch);
  }
  const double rem = high ? lp_norm(V.values - ex.V0.values, p) : dual_distance(V.values, ex.V0.values, p);
  return make_report(gap, rem, c.alt_exponent, c.sigma_alt, opts.tol, branch);
}

StabilityReport verify_min_stability(const ReciprocalPotential& W, const MinExtremal& ex,
                                     const ConstantsMin& constants, const SourceTerm& f,
                                     const SolverOptions& opts) {
  require_same_grid(W.values, ex.W0.values);
  if (!W.values.nonnegative()) throw InvalidInput("reciprocal potential must be nonnegative");
  const double p = ex.p;
  const double norm = lp_norm(W.values, p);
  if (norm > 1.0 + kConstraintSlack) {
    throw InvalidInput("reciprocal potential violates |W|_p <= 1 (norm " + std::to_string(norm) + ")");
  }
  const EnergyResult st = solve_state(W, f, opts);
  const double gap = st.energy - ex.energy;
  std::string branch = "main";
  if (gap > constants.c5) {
    branch = "trivial";
  } else if (gap > constants.footnote_threshold) {
    branch = "footnote";
  }
  return make_report(gap, lp_norm(W.values - ex.W0.values, p), constants.beta, constants.sigma_m,
                     opts.tol, branch);
}

MaxStateReport verify_max_state_stability(const Potential& V, const MaxExtremal& ex,
                                          const SourceTerm& f, const SolverOptions& opts) {
  require_same_grid(V.values, ex.V0.values);
  const double p = ex.p;
  const double m = 2.0 * p / (p - 1.0);
  const double slack = 10.0 * opts.tol;
  MaxStateReport r;
  const EnergyResult st = solve_state(V, f, opts);
  const GridFunction psi = st.state - ex.v0;
  r.gap = ex.energy - st.energy;
  r.distance_h1 = h1_seminorm(psi);
  r.distance_m = lp_norm(psi, m);
  r.weak_lhs = r.distance_h1 * r.distance_h1;
  r.weak_rhs = std::pow(lp_integral(st.state, m), 2.0 / m) - inner(hadamard(V.values, st.state), st.state);
  r.weak_passed = r.weak_lhs <= r.weak_rhs + slack;

  const ConstantsMax c = constants_max(ex);
  r.theta = std::max(2.0, p);
  // |V - V0|_p <= (gap / sigma)^{1/theta} from the potential estimate with
  // exponent theta: the primary flavor for p < 2, the alternate for p >= 2.
  const double sigma = p < 2.0 ? c.sigma_M_doubleprime : c.sigma_alt;
  const double kappa = 1.0 / coercivity_factor(V, opts).factor;
  r.constant = kappa * std::pow(sigma, 1.0 / r.theta) / ex.c1;
  const double g = std::max(r.gap, 0.0);
  r.strong_lhs = std::pow(g, 1.0 / r.theta) * r.distance_m;
  r.strong_rhs = r.constant * r.weak_lhs;
  r.strong_passed = r.strong_lhs >= r.strong_rhs - slack;

  const Grid& grid = *V.values.grid();
  if (grid.radial() && std::abs(m - 6.0) < 1e-12) {
    r.sobolev_form_checked = true;
    r.sobolev_lhs = std::pow(g, 1.0 / r.theta);
    r.sobolev_rhs = r.constant * std::sqrt(talenti_constant(3)) * r.distance_h1;
    r.sobolev_passed = r.sobolev_lhs >= r.sobolev_rhs - slack;
  }
  r.passed = r.weak_passed && r.strong_passed && r.sobolev_passed;
  return r;
}

MinStateReport verify_min_state_stability(const ReciprocalPotential& W, const MinExtremal& ex,
                                          const ConstantsMin& constants, const SourceTerm& f,
                                          const SolverOptions& opts) {
  require_same_grid(W.values, ex.W0.values);
  const double p = ex.p;
  const double q = 2.0 * p / (p + 1.0);
  const double slack = 10.0 * opts.tol;
  MinStateReport r;
  const EnergyResult st = solve_state(W, f, opts);
  const GridFunction psi = st.state - ex.u0;
  r.gap = st.energy - ex.energy;
  const double g = std::max(r.gap, 0.0);
  r.lhs = std::pow(g, (p - 1.0) / (2.0 * p));
  r.constant = constants.state_constant;
  const double h1 = h1_seminorm(psi);
  const double lq = lp_norm(psi, q);
  r.rhs = r.constant * (h1 * h1 + lq * lq);
  r.passed = r.lhs >= r.rhs - slack;
  if (r.gap <= 1.0) {
    r.corner_checked = true;
    const double nu = lp_norm(st.state, q);
    r.corner_lhs = std::abs(ex.c2 * ex.c2 - nu * nu);
    r.corner_rhs = std::sqrt(g) / constants.c3;
    r.corner_passed = r.corner_lhs <= r.corner_rhs + slack;
  }
  r.passed = r.passed && r.corner_passed;
  return r;
}

ScalingProbe scaling_probe(const GridFunction& direction, const MaxExtremal& ex, const SourceTerm& f,
                           std::span<const double> eps_list, const SolverOptions& opts) {
  require_same_grid(direction, ex.V0.values);
  const double p = ex.p;
  GridFunction psi = direction;
  if (inner(psi, signed_power(ex.V0.values, p)) < 0.0) psi = -psi;
  ScalingProbe out;
  for (double eps : eps_list) {
    Potential V = eps == 0.0 ? ex.V0 : project_max_constraint({ex.V0.values + eps * psi}, p);
    const StabilityReport prim = verify_max_stability(V, ex, f, MaxFlavor::primary, opts);
    const StabilityReport alt = verify_max_stability(V, ex, f, MaxFlavor::alternate, opts);
    out.eps.push_back(eps);
    out.gaps.push_back(prim.gap);
    out.remainders_primary.push_back(prim.remainder);
    out.remainders_alternate.push_back(alt.remainder);
    out.margins.push_back(prim.margin);
  }
  out.slope = fitted_slope(out.eps, out.gaps);
  return out;
}

ScalingProbe scaling_probe(const GridFunction& direction, const MinExtremal& ex,
                           const ConstantsMin& constants, const SourceTerm& f,
                           std::span<const double> eps_list, const SolverOptions& opts) {
  require_same_grid(direction, ex.W0.values);
  ScalingProbe out;
  for (double eps : eps_list) {
    const ReciprocalPotential W =
        eps == 0.0 ? ex.W0 : saturate_min_constraint({ex.W0.values + eps * direction}, ex.p);
    const StabilityReport r = verify_min_stability(W, ex, constants, f, opts);
    out.eps.push_back(eps);
    out.gaps.push_back(r.gap);
    out.remainders_primary.push_back(r.remainder);
    out.remainders_alternate.push_back(r.remainder);
    out.margins.push_back(r.margin);
  }
  out.slope = fitted_slope(out.eps, out.gaps);
  return out;
}

Potential random_max_potential(const GridPtr& grid, Rng& rng, double p) {
  std::uniform_real_distribution<double> radius(0.5, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  GridFunction v = random_smooth_field(grid, rng, false);
  const bool keep_sign = pick(rng) == 0;
  if (!keep_sign) v = v.map([](double x) { return std::abs(x); });
  const double scale = radius(rng) / lp_norm(v, p);
  return {v * scale};
}

ReciprocalPotential random_min_reciprocal(const GridPtr& grid, Rng& rng, double p) {
  std::uniform_real_distribution<double> floor(0.0, 0.5);
  const double base = floor(rng);
  GridFunction v = random_smooth_field(grid, rng, false);
  const double amp = v.max_abs();
  v = v.map([&](double x) { return std::abs(x) + base * amp; });
  return saturate_min_constraint({v}, p);
}

Potential indicator_potential(const GridPtr& grid, const std::function<bool(std::span<const double>)>& in_set,
                              double p) {
  std::vector<char> mask;
  const double m = node_measure(grid, in_set, mask);
  GridFunction v(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) v[i] = mask[i] ? std::pow(m, -1.0 / p) : 0.0;
  return {v};
}

ReciprocalPotential indicator_reciprocal(const GridPtr& grid,
                                         const std::function<bool(std::span<const double>)>& in_set,
                                         double p) {
  std::vector<char> mask;
  const double m = node_measure(grid, in_set, mask);
  GridFunction w(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) w[i] = mask[i] ? std::pow(m, -1.0 / p) : 0.0;
  return {w};
}

}  // namespace qstab
