#include "qstab/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qstab/errors.hpp"
#include "qstab/sparse.hpp"

namespace qstab {

namespace {

using Apply = std::function<void(std::span<const double>, std::span<double>)>;

void require_potential(const GridFunction& v, const char* what) {
  if (!v.grid()) throw InvalidInput(std::string(what) + " has no grid");
  if (!v.finite()) throw InvalidInput(std::string(what) + " has non-finite values");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Smallest eigenvalue mu of A x = mu B x (A SPD as a matrix, B SPD as an
// operator) by inverse iteration with Rayleigh quotients.
double smallest_generalized(const CsrMatrix& a, const Apply& b, std::vector<double> x,
                            int max_iterations, int* iterations) {
  const std::size_t n = x.size();
  const IncompleteCholesky m(a);
  std::vector<double> bx(n), z(n, 0.0), az(n);
  double mu = 0.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    b(x, bx);
    std::fill(z.begin(), z.end(), 0.0);
    const CgResult res = pcg(a, bx, z, m, 1e-12, 100000);
    if (!res.converged && res.relative_residual > 1e-8) {
      throw ConvergenceError("inner solve failed during inverse iteration (residual " +
                             std::to_string(res.relative_residual) + ")");
    }
    a.multiply(z, az);
    b(z, bx);
    const double zbz = dot(z, bx);
    const double mu_new = dot(z, az) / zbz;
    const double scale = 1.0 / std::sqrt(zbz);
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] * scale;
    if (it > 0 && std::abs(mu_new - mu) <= 1e-13 * std::abs(mu_new)) {
      mu = mu_new;
      ++it;
      break;
    }
    mu = mu_new;
  }
  if (iterations != nullptr) *iterations = it;
  return mu;
}

Apply weight_apply(const Grid& grid) {
  return [&grid](std::span<const double> x, std::span<double> y) {
    const auto w = grid.weights();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = w[i] * x[i];
  };
}

std::vector<double> weighted(const GridFunction& f) {
  std::vector<double> b(f.size());
  const auto w = f.grid()->weights();
  for (std::size_t i = 0; i < f.size(); ++i) b[i] = w[i] * f[i];
  return b;
}

std::vector<double> potential_diagonal(const GridFunction& V, double shift = 0.0) {
  std::vector<double> d(V.size());
  const auto w = V.grid()->weights();
  for (std::size_t i = 0; i < V.size(); ++i) d[i] = w[i] * (V[i] + shift);
  return d;
}

void fill_energies(EnergyResult& res, const SourceTerm& f, double quadratic) {
  const double fu = inner(f.values, res.state);
  res.energy = -0.5 * fu;
  res.energy_direct = 0.5 * quadratic - fu;
}

}  // namespace

double laplacian_ground_value(const Grid& grid) {
  if (!grid.radial()) return grid.laplacian_ground_value();
  const std::vector<double> zero(grid.size(), 0.0);
  const CsrMatrix k = assemble_operator(grid, zero);
  return smallest_generalized(k, weight_apply(grid), std::vector<double>(grid.size(), 1.0),
                              2000, nullptr);
}

AdmissibilityCertificate check_admissible(const Potential& V) {
  require_potential(V.values, "potential");
  const Grid& grid = *V.values.grid();
  AdmissibilityCertificate cert;
  const double vmin = V.values.min();
  if (vmin >= 0.0) {
    cert.coercive = true;
    cert.margin = laplacian_ground_value(grid) + vmin;
    return cert;
  }
  // Shift so the operator is SPD, then undo the shift on the eigenvalue.
  const double shift = 1.0 - vmin;
  const CsrMatrix a = assemble_operator(grid, potential_diagonal(V.values, shift));
  const double mu = smallest_generalized(a, weight_apply(grid),
                                         std::vector<double>(grid.size(), 1.0), 5000,
                                         &cert.iterations);
  cert.margin = mu - shift;
  cert.coercive = cert.margin > 0.0;
  return cert;
}

AdmissibilityCertificate check_admissible(const Potential& V, const SourceTerm& f) {
  require_same_grid(V.values, f.values);
  return check_admissible(V);
}

EnergyResult solve_state(const Potential& V, const SourceTerm& f, const SolverOptions& opts) {
  require_potential(V.values, "potential");
  require_potential(f.values, "source");
  require_same_grid(V.values, f.values);
  const Grid& grid = *V.values.grid();
  if (V.values.min() < 0.0) {
    const AdmissibilityCertificate cert = check_admissible(V);
    if (!cert.coercive) {
      throw AdmissibilityError("potential is not coercive: smallest eigenvalue " +
                                   std::to_string(cert.margin),
                               cert.margin);
    }
  }
  const CsrMatrix a = assemble_operator(grid, potential_diagonal(V.values));
  const std::vector<double> b = weighted(f.values);
  CgResult info;
  EnergyResult res;
  res.state = GridFunction(V.values.grid(), solve_spd(a, b, opts.tol, opts.max_iterations, &info));
  res.residual = info.relative_residual;
  res.iterations = info.iterations;
  std::vector<double> au(grid.size());
  a.multiply(res.state.values(), au);
  fill_energies(res, f, dot(res.state.values(), au));
  return res;
}

EnergyResult solve_state(const ReciprocalPotential& W, const SourceTerm& f,
                         const SolverOptions& opts) {
  require_potential(W.values, "reciprocal potential");
  require_potential(f.values, "source");
  require_same_grid(W.values, f.values);
  if (!W.values.nonnegative()) throw InvalidInput("reciprocal potential must be nonnegative");
  const Grid& grid = *W.values.grid();
  const auto w = grid.weights();
  std::vector<char> pinned(grid.size(), 0);
  std::vector<double> extra(grid.size(), 0.0);
  std::vector<double> b = weighted(f.values);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (W.values[i] == 0.0) {
      pinned[i] = 1;
      b[i] = 0.0;
    } else {
      extra[i] = w[i] / W.values[i];
    }
  }
  const CsrMatrix a = assemble_operator(grid, extra, &pinned);
  CgResult info;
  EnergyResult res;
  res.state = GridFunction(W.values.grid(), solve_spd(a, b, opts.tol, opts.max_iterations, &info));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (pinned[i]) res.state[i] = 0.0;
  }
  res.residual = info.relative_residual;
  res.iterations = info.iterations;
  const double h1 = h1_seminorm(res.state);
  fill_energies(res, f, h1 * h1 + reciprocal_weighted_integral(W, res.state));
  return res;
}

GridFunction riesz_representative(const SourceTerm& f, const SolverOptions& opts) {
  require_potential(f.values, "source");
  const Grid& grid = *f.values.grid();
  const CsrMatrix k = assemble_operator(grid, std::vector<double>(grid.size(), 0.0));
  return GridFunction(f.values.grid(),
                      solve_spd(k, weighted(f.values), opts.tol, opts.max_iterations));
}

double dual_norm(const SourceTerm& f, const SolverOptions& opts) {
  return h1_seminorm(riesz_representative(f, opts));
}

double dual_norm_coefficients(const Grid& grid, std::span<const double> r,
                              const SolverOptions& opts) {
  const CsrMatrix k = assemble_operator(grid, std::vector<double>(grid.size(), 0.0));
  const std::vector<double> phi = solve_spd(k, r, opts.tol, opts.max_iterations);
  return std::sqrt(std::max(0.0, dot(r, phi)));
}

CoercivityFactor coercivity_factor(const Potential& V, const SolverOptions& /*opts*/) {
  require_potential(V.values, "potential");
  if (V.values.min() >= 0.0) return {1.0, "nonnegative"};
  const AdmissibilityCertificate cert = check_admissible(V);
  if (!cert.coercive) throw AdmissibilityError("potential is not coercive", cert.margin);
  const Grid& grid = *V.values.grid();
  const CsrMatrix a = assemble_operator(grid, potential_diagonal(V.values));
  const CsrMatrix k = assemble_operator(grid, std::vector<double>(grid.size(), 0.0));
  const Apply kapply = [&k](std::span<const double> x, std::span<double> y) { k.multiply(x, y); };
  const double kappa = smallest_generalized(a, kapply, std::vector<double>(grid.size(), 1.0),
                                            5000, nullptr);
  return {1.0 / kappa, "spectral"};
}

EnergyEstimateReport energy_estimate_check(const Potential& V, const SourceTerm& f,
                                           const SolverOptions& opts) {
  EnergyEstimateReport rep;
  const EnergyResult st = solve_state(V, f, opts);
  const CoercivityFactor cf = coercivity_factor(V, opts);
  rep.state_norm = h1_seminorm(st.state);
  rep.source_dual_norm = dual_norm(f, opts);
  rep.factor = cf.factor;
  rep.factor_source = cf.source;
  rep.bound = cf.factor * rep.source_dual_norm;
  rep.margin = rep.bound - rep.state_norm;
  rep.passed = rep.margin >= -10.0 * opts.tol * std::max(1.0, rep.bound);
  return rep;
}

WeightedGapReport weighted_l2_gap(const Potential& V1, const Potential& V2, const SourceTerm& f,
                                  const SolverOptions& opts) {
  WeightedGapReport rep;
  const EnergyResult s1 = solve_state(V1, f, opts);
  const EnergyResult s2 = solve_state(V2, f, opts);
  const double a1 = inner(hadamard(V1.values, s1.state), s1.state);
  const double a2 = inner(hadamard(V2.values, s2.state), s2.state);
  rep.lhs = std::abs(a1 - a2);
  rep.constant = 1.0 + coercivity_factor(V1, opts).factor + coercivity_factor(V2, opts).factor;
  rep.bound = rep.constant * dual_norm(f, opts) * h1_seminorm(s1.state - s2.state);
  rep.margin = rep.bound - rep.lhs;
  rep.passed = rep.margin >= -10.0 * opts.tol;
  return rep;
}

EnergyDifferenceReport energy_difference_identity(const Potential& V1, const Potential& V2,
                                                  const SourceTerm& f, double p,
                                                  const SolverOptions& opts) {
  if (!(p > 1.0)) throw InvalidInput("Lipschitz exponent p must exceed 1");
  EnergyDifferenceReport rep;
  const EnergyResult s1 = solve_state(V1, f, opts);
  const EnergyResult s2 = solve_state(V2, f, opts);
  const GridFunction dv = V1.values - V2.values;
  const GridFunction adv = dv.map([](double x) { return std::abs(x); });
  rep.delta_energy = s1.energy - s2.energy;
  rep.identity_rhs = 0.5 * inner(hadamard(dv, s1.state), s2.state);
  rep.identity_error = std::abs(rep.delta_energy - rep.identity_rhs);
  rep.weighted_bound = 0.5 * std::sqrt(inner(hadamard(adv, s1.state), s1.state)) *
                       std::sqrt(inner(hadamard(adv, s2.state), s2.state));
  const double m = 2.0 * p / (p - 1.0);
  rep.lipschitz_bound = 0.5 * lp_norm(dv, p) * lp_norm(s1.state, m) * lp_norm(s2.state, m);
  const double slack = 10.0 * opts.tol;
  rep.identity_passed = rep.identity_error <= slack;
  rep.bounds_passed = std::abs(rep.delta_energy) <= rep.weighted_bound + slack &&
                      rep.weighted_bound <= rep.lipschitz_bound + slack;
  return rep;
}

double energy_functional(const Potential& V, const SourceTerm& f, const GridFunction& u) {
  const double h1 = h1_seminorm(u);
  return 0.5 * h1 * h1 + 0.5 * inner(hadamard(V.values, u), u) - inner(f.values, u);
}

double reciprocal_weighted_integral(const ReciprocalPotential& W, const GridFunction& u) {
  require_same_grid(W.values, u);
  const auto w = u.grid()->weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (W.values[i] > 0.0) {
      acc += w[i] * u[i] * u[i] / W.values[i];
    } else if (u[i] != 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return acc;
}

double energy_functional(const ReciprocalPotential& W, const SourceTerm& f,
                         const GridFunction& u) {
  const double h1 = h1_seminorm(u);
  return 0.5 * h1 * h1 + 0.5 * reciprocal_weighted_integral(W, u) - inner(f.values, u);
}

}  // namespace qstab
