#include "qstab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qstab/errors.hpp"

namespace qstab {

namespace {

constexpr double kDampingFloor = 1.0 / (1 << 20);
constexpr double kJacobianClamp = 1e-14;

const Grid& radial_grid(const GridFunction& u) {
  if (!u.grid() || !u.grid()->radial()) throw InvalidInput("radial operation needs a radial grid");
  return *u.grid();
}

void validate_problem(const RadialProblem& prob) {
  const Grid& grid = radial_grid(prob.source);
  if (prob.N != grid.dimension()) throw InvalidInput("problem dimension does not match the grid");
  if (!(prob.q > 1.0 && prob.q < 2.0)) throw InvalidInput("radial problem needs 1 < q < 2");
  if (!(prob.a > 0.0)) throw InvalidInput("radial problem needs a > 0");
  if (!(prob.R > 0.0)) throw InvalidInput("radial problem needs R > 0");
  if (!prob.source.finite()) throw InvalidInput("source must be finite");
}

// Tridiagonal form of the radial stiffness matrix: diag[k], off[k] couples k and k+1.
struct Chain {
  std::vector<double> diag, off;
};

Chain stiffness_chain(const Grid& grid) {
  const std::size_t n = grid.size();
  Chain c{std::vector<double>(n, 0.0), std::vector<double>(n > 0 ? n - 1 : 0, 0.0)};
  for (const Edge& e : grid.edges()) {
    c.diag[e.i] += e.c;
    if (e.j >= 0) {
      c.diag[e.j] += e.c;
      c.off[std::min(e.i, e.j)] -= e.c;
    }
  }
  return c;
}

void chain_apply(const Chain& k, std::span<const double> u, std::span<double> out) {
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = k.diag[i] * u[i];
    if (i > 0) s += k.off[i - 1] * u[i - 1];
    if (i + 1 < n) s += k.off[i] * u[i + 1];
    out[i] = s;
  }
}

// Thomas algorithm; the matrix is a symmetric M-matrix so no pivoting is needed.
std::vector<double> chain_solve(std::vector<double> diag, const std::vector<double>& off, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

double odd_power(double u, double e) { return u >= 0.0 ? std::pow(u, e) : -std::pow(-u, e); }

struct Residual {
  std::vector<double> r;  // coefficient space
  double worst = 0.0;     // max_i |r_i| / (w_i scale_i)
  double merit = 0.0;     // rms of the relative residual
};

Residual evaluate(const RadialProblem& prob, const Chain& k, const std::vector<double>& u) {
  const Grid& grid = *prob.source.grid();
  const std::size_t n = u.size();
  std::vector<double> ku(n);
  chain_apply(k, u, ku);
  double fmax = prob.source.max_abs();
  Residual out;
  out.r.resize(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid.weight(i);
    const double nl = prob.a * odd_power(u[i], prob.q - 1.0);
    out.r[i] = ku[i] + w * (nl - prob.source[i]);
    const double scale = std::abs(prob.source[i]) + std::abs(nl) + std::abs(ku[i]) / w + 1e-12 * fmax;
    const double rel = std::abs(out.r[i]) / (w * scale);
    out.worst = std::max(out.worst, rel);
    sq += rel * rel;
  }
  out.merit = std::sqrt(sq / static_cast<double>(n));
  return out;
}

double interpolate(const GridFunction& w, double x) {
  const Grid& grid = *w.grid();
  const double h = grid.spacing(0);
  const std::size_t n = grid.size();
  const double s = x / h;
  const auto k = static_cast<std::size_t>(std::floor(s));
  if (k >= n) return 0.0;
  const double t = s - static_cast<double>(k);
  const double right = k + 1 < n ? w[k + 1] : 0.0;
  return (1.0 - t) * w[k] + t * right;
}

std::pair<double, double> default_window(const RadialProblem& prob) {
  return {2.0 * prob.R, 0.8 * prob.truncation_radius};
}

}  // namespace

RadialProblem make_radial_problem(const GridFunction& source, double q, double a, double alpha, double R,
                                  double b) {
  const Grid& grid = radial_grid(source);
  RadialProblem prob;
  prob.N = grid.dimension();
  prob.q = q;
  prob.a = a;
  prob.alpha = alpha;
  prob.R = R;
  prob.source = source;
  prob.truncation_radius = grid.domain().truncation_radius;
  validate_problem(prob);
  double measured = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = grid.coordinate(i, 0);
    if (rho >= R) measured = std::max(measured, std::abs(source[i]) * std::pow(rho, alpha));
  }
  if (b > 0.0) {
    if (measured > b * (1.0 + 1e-12)) {
      throw InvalidInput("source exceeds the tail bound b rho^-alpha (needs b >= " + std::to_string(measured) + ")");
    }
    prob.b = b;
  } else {
    prob.b = measured;
  }
  return prob;
}

void require_decay_hypothesis(const RadialProblem& prob) {
  validate_problem(prob);
  const double threshold = (prob.N + 2.0) / 2.0;
  if (!(prob.alpha > threshold)) {
    throw InvalidInput("decay analysis needs alpha > (N+2)/2 = " + std::to_string(threshold));
  }
  const Grid& grid = *prob.source.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = grid.coordinate(i, 0);
    if (rho >= prob.R && std::abs(prob.source[i]) > prob.b * std::pow(rho, -prob.alpha) * (1.0 + 1e-12)) {
      throw InvalidInput("source violates |f| <= b rho^-alpha at rho = " + std::to_string(rho));
    }
  }
}

GridFunction power_tail_source(const GridPtr& grid, double C, double alpha) {
  return GridFunction::sample(grid, [C, alpha](auto x) { return C * std::pow(1.0 + x[0] * x[0], -0.5 * alpha); });
}

GridFunction semilinear_residual(const RadialProblem& prob, const GridFunction& u) {
  validate_problem(prob);
  require_same_grid(u, prob.source);
  const Grid& grid = *u.grid();
  const Chain k = stiffness_chain(grid);
  std::vector<double> ku(u.size());
  chain_apply(k, u.values(), ku);
  GridFunction out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = ku[i] / grid.weight(i) + prob.a * odd_power(u[i], prob.q - 1.0) - prob.source[i];
  }
  return out;
}

GridFunction solve_semilinear_radial(const RadialProblem& prob, double tol, int max_iterations) {
  validate_problem(prob);
  if (!prob.source.nonnegative()) throw InvalidInput("semilinear solve needs a nonnegative source");
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  const GridPtr& gp = prob.source.grid();
  const Grid& grid = *gp;
  if (prob.source.is_zero()) return GridFunction(gp);
  const std::size_t n = grid.size();
  const Chain k = stiffness_chain(grid);
  const double e = 1.0 / (prob.q - 1.0);

  // Local balance a u^{q-1} = f, exact where diffusion is negligible.
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::pow(prob.source[i] / prob.a, e);
  Residual res = evaluate(prob, k, u);

  for (int it = 0; it < max_iterations; ++it) {
    if (res.worst <= tol) return GridFunction(gp, u);
    std::vector<double> diag = k.diag;
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double uc = std::max(std::abs(u[i]), kJacobianClamp);
      diag[i] += grid.weight(i) * prob.a * (prob.q - 1.0) * std::pow(uc, prob.q - 2.0);
      rhs[i] = -res.r[i];
    }
    const std::vector<double> step = chain_solve(std::move(diag), k.off, std::move(rhs));
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= kDampingFloor) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + lambda * step[i];
      Residual tr = evaluate(prob, k, trial);
      if (tr.merit < res.merit || tr.worst <= tol) {
        u = std::move(trial);
        res = std::move(tr);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      throw ConvergenceError("semilinear Newton: damping floor reached at relative residual " +
                             std::to_string(res.worst));
    }
  }
  if (res.worst <= tol) return GridFunction(gp, u);
  throw ConvergenceError("semilinear Newton: no convergence after " + std::to_string(max_iterations) +
                         " iterations (relative residual " + std::to_string(res.worst) + ")");
}

double c2_from_coefficient(const RadialProblem& prob) { return std::pow(prob.a, 1.0 / (2.0 - prob.q)); }

LinftyReport linfty_bound(const GridFunction& u, const RadialProblem& prob, double c2, double tol) {
  validate_problem(prob);
  require_same_grid(u, prob.source);
  if (!(c2 > 0.0)) throw InvalidInput("linfty bound needs c2 > 0");
  const Grid& grid = *u.grid();
  LinftyReport r;
  r.max_u = u.max();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.coordinate(i, 0) < prob.R) r.inner_max = std::max(r.inner_max, u[i]);
  }
  r.tail_threshold = std::pow(std::pow(c2, prob.q - 2.0) * prob.b * std::pow(prob.R, -prob.alpha), 1.0 / (prob.q - 1.0));
  r.M = std::max(r.inner_max, r.tail_threshold);
  r.slack = r.M - r.max_u;
  r.passed = r.max_u <= r.M + tol;
  return r;
}

ComparisonReport comparison_against(const GridFunction& u, const GridFunction& w, const RadialProblem& prob,
                                    int max_doublings, double tol) {
  validate_problem(prob);
  require_same_grid(u, prob.source);
  require_same_grid(w, prob.source);
  const Grid& grid = *u.grid();
  const double q = prob.q;
  ComparisonReport r;
  r.w = w;
  r.T1 = std::max(prob.R, std::pow(std::pow(2.0, prob.alpha / 2.0) * prob.b * std::pow(prob.R, -prob.alpha),
                                    (2.0 - q) / (2.0 * q - 2.0)));
  r.truncation_adequate = 2.0 * r.T1 < 0.8 * prob.truncation_radius;
  const double exponent = 2.0 / (2.0 - q);
  double T = 1.0;
  for (int d = 0; d <= max_doublings; ++d, T *= 2.0) {
    const double scale = std::pow(T, exponent);
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size() && ok; ++i) {
      if (u[i] <= 0.0) continue;
      const double wt = scale * interpolate(w, grid.coordinate(i, 0) / T);
      if (!(u[i] <= wt * (1.0 + tol))) ok = false;
      worst = std::max(worst, u[i] / wt);
    }
    if (ok) {
      r.found = true;
      r.T = T;
      r.scale = scale;
      r.worst_ratio = worst;
      break;
    }
  }
  if (!r.found) r.note = "no T up to 2^" + std::to_string(max_doublings);
  else if (!r.truncation_adequate) r.note = "truncation radius too small for the tail comparison";
  r.passed = r.found && r.truncation_adequate;
  return r;
}

ComparisonReport comparison_check(const GridFunction& u, const RadialProblem& prob, double c2, int max_doublings,
                                  double tol) {
  validate_problem(prob);
  if (!(c2 > 0.0)) throw InvalidInput("comparison needs c2 > 0");
  RadialProblem cmp = prob;
  cmp.a = std::pow(c2, 2.0 - prob.q);
  cmp.source = power_tail_source(prob.source.grid(), 1.0, prob.alpha);
  cmp.b = 1.0;
  const GridFunction w = solve_semilinear_radial(cmp);
  return comparison_against(u, w, prob, max_doublings, tol);
}

DecayFit decay_fit(const GridFunction& u, const RadialProblem& prob, double lo, double hi) {
  validate_problem(prob);
  require_same_grid(u, prob.source);
  const auto [dlo, dhi] = default_window(prob);
  DecayFit fit;
  fit.lo = lo > 0.0 ? lo : dlo;
  fit.hi = hi > 0.0 ? hi : dhi;
  if (!(fit.lo < fit.hi)) throw InvalidInput("empty fit range");
  const Grid& grid = *u.grid();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = grid.coordinate(i, 0);
    if (rho < fit.lo || rho > fit.hi) continue;
    if (!(u[i] > 0.0)) throw InvalidInput("u vanishes on the fit range at rho = " + std::to_string(rho));
    x.push_back(std::log(rho));
    y.push_back(std::log(u[i]));
  }
  if (x.size() < 3) throw InvalidInput("fit range holds fewer than 3 nodes");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - fit.intercept - fit.slope * x[i];
    ss += d * d;
  }
  fit.rms = std::sqrt(ss / n);
  fit.nodes = static_cast<int>(x.size());
  fit.expected_slope = -prob.alpha / (prob.q - 1.0);
  fit.slope_ok = std::abs(fit.slope - fit.expected_slope) <= 0.1 * std::abs(fit.expected_slope);
  fit.power_law = fit.rms <= kPowerLawRms;
  return fit;
}

std::vector<double> bootstrap_exponents(int N, double q, double gamma, int steps) {
  std::vector<double> b{2.0 * (N - 1) / (2.0 + q)};
  for (int i = 0; i < steps; ++i) b.push_back(0.5 * (gamma + b.back()));
  return b;
}

BootstrapReport weak_decay_bootstrap(const GridFunction& u, const RadialProblem& prob, int steps, double tol) {
  validate_problem(prob);
  require_same_grid(u, prob.source);
  const Grid& grid = *u.grid();
  BootstrapReport r;
  r.gamma = prob.alpha;
  r.strauss = strauss_bound(u, prob.q);
  r.beta0 = 2.0 * (prob.N - 1) / (2.0 + prob.q);
  r.nothing_to_prove = r.gamma <= r.beta0;
  r.exponents = bootstrap_exponents(prob.N, prob.q, r.gamma, r.nothing_to_prove ? 0 : steps);

  const auto [lo, hi] = default_window(prob);
  if (!(lo < hi)) throw InvalidInput("tail window [2R, 0.8 truncation_radius] is empty");
  const double mid = std::sqrt(lo * hi);
  bool chain = r.strauss.passed;
  for (std::size_t s = 0; s < r.exponents.size(); ++s) {
    const double beta = r.exponents[s];
    double C = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double rho = grid.coordinate(i, 0);
      if (rho >= lo && rho <= mid) C = std::max(C, u[i] * std::pow(rho, beta));
    }
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double rho = grid.coordinate(i, 0);
      if (rho >= mid && rho <= hi && u[i] > C * std::pow(rho, -beta) * (1.0 + tol)) ok = false;
    }
    r.constants.push_back(C);
    r.verified.push_back(ok);
    chain = chain && ok;
    if (chain) {
      r.deepest = beta;
      if (s > 0) ++r.steps_verified;
    }
  }
  return r;
}

}  // namespace qstab
