#include "qstab/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qstab/errors.hpp"
#include "qstab/sobolev.hpp"
#include "qstab/sparse.hpp"

namespace qstab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("exponent p must satisfy 1 < p < inf");
}

void require_source(const SourceTerm& f) {
  if (!f.values.grid()) throw InvalidInput("source has no grid");
  if (!f.values.finite()) throw InvalidInput("source has non-finite values");
  if (f.values.is_zero()) {
    throw DegenerateInputError("source is identically zero: the minimizer vanishes and the "
                               "extremal potential is 0/0");
  }
}

// F(u) = 1/2 u^T K u + 1/2 S^{2/s} - b^T u with S = sum_i w_i phi(u_i) and
// phi(t) = (t^2 + eps^2)^{s/2} - eps^s (phi = |t|^s when eps = 0).
class NormFunctional {
public:
  NormFunctional(const Grid& grid, std::vector<double> b, double s)
      : grid_(grid), b_(std::move(b)), s_(s),
        k_(assemble_operator(grid, std::vector<double>(grid.size(), 0.0))), k_pre_(k_) {}

  void set_eps(double eps) { eps_ = eps; }

  double phi(double t) const {
    if (eps_ == 0.0) return std::pow(std::abs(t), s_);
    return std::pow(t * t + eps_ * eps_, s_ / 2.0) - std::pow(eps_, s_);
  }
  double dphi(double t) const {
    if (eps_ == 0.0) return t == 0.0 ? 0.0 : s_ * std::pow(std::abs(t), s_ - 2.0) * t;
    return s_ * t * std::pow(t * t + eps_ * eps_, s_ / 2.0 - 1.0);
  }
  double ddphi(double t) const {
    if (eps_ == 0.0) return t == 0.0 ? 0.0 : s_ * (s_ - 1.0) * std::pow(std::abs(t), s_ - 2.0);
    const double r = t * t + eps_ * eps_;
    return s_ * std::pow(r, s_ / 2.0 - 2.0) * ((s_ - 1.0) * t * t + eps_ * eps_);
  }

  double norm_integral(std::span<const double> u) const {
    const auto w = grid_.weights();
    double S = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) S += w[i] * phi(u[i]);
    return S;
  }

  double value(std::span<const double> u) const {
    std::vector<double> ku(u.size());
    k_.multiply(u, ku);
    const double S = norm_integral(u);
    return 0.5 * dot(u, ku) + 0.5 * std::pow(S, 2.0 / s_) - dot(b_, u);
  }

  std::vector<double> gradient(std::span<const double> u) const {
    const auto w = grid_.weights();
    std::vector<double> g(u.size());
    k_.multiply(u, g);
    const double S = norm_integral(u);
    const double c = S > 0.0 ? std::pow(S, 2.0 / s_ - 1.0) / s_ : 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) g[i] += c * w[i] * dphi(u[i]) - b_[i];
    return g;
  }

  // sqrt(r^T K^{-1} r) and K^{-1} r.
  double dual_norm(std::span<const double> r, std::vector<double>* riesz,
                   const SolverOptions& lin) const {
    std::vector<double> x(r.size(), 0.0);
    pcg(k_, r, x, k_pre_, lin.tol, lin.max_iterations);
    const double n2 = std::max(0.0, dot(r, x));
    if (riesz != nullptr) *riesz = std::move(x);
    return std::sqrt(n2);
  }

  // Newton direction -H^{-1} g with H = A + sigma a a^T, A = K + diag(D),
  // via Sherman-Morrison. Returns false when the linear solves fail.
  bool newton_direction(std::span<const double> u, std::span<const double> g,
                        std::vector<double>& d, const SolverOptions& lin) const {
    const auto w = grid_.weights();
    const std::size_t n = u.size();
    const double S = norm_integral(u);
    if (!(S > 0.0)) return false;
    const double c = std::pow(S, 2.0 / s_ - 1.0) / s_;
    const double sigma = (2.0 / s_ - 1.0) * std::pow(S, 2.0 / s_ - 2.0) / s_;
    std::vector<double> diag(n), a(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = c * w[i] * ddphi(u[i]);
      a[i] = w[i] * dphi(u[i]);
      rhs[i] = -g[i];
    }
    const CsrMatrix h = assemble_operator(grid_, diag);
    const IncompleteCholesky m(h);
    std::vector<double> y(n, 0.0), z(n, 0.0);
    const CgResult ry = pcg(h, rhs, y, m, lin.tol, lin.max_iterations);
    const CgResult rz = pcg(h, a, z, m, lin.tol, lin.max_iterations);
    if (ry.relative_residual > 1e-6 || rz.relative_residual > 1e-6) return false;
    const double denom = 1.0 + sigma * dot(a, z);
    if (!(denom > 0.0)) return false;
    const double coef = sigma * dot(a, y) / denom;
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = y[i] - coef * z[i];
    return true;
  }

  std::vector<double> poisson() const {
    std::vector<double> x(b_.size(), 0.0);
    pcg(k_, b_, x, k_pre_, 1e-12, 100000);
    return x;
  }

private:
  const Grid& grid_;
  std::vector<double> b_;
  double s_;
  double eps_ = 0.0;
  CsrMatrix k_;
  IncompleteCholesky k_pre_;
};

struct StageResult {
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Damped Newton with Armijo backtracking; the H^1_0 gradient -K^{-1} g is
// the fallback direction when the Newton system misbehaves.
StageResult minimize_stage(const NormFunctional& F, std::vector<double>& u, double tol,
                           int max_iterations, const SolverOptions& lin) {
  StageResult out;
  const std::size_t n = u.size();
  std::vector<double> g = F.gradient(u);
  std::vector<double> riesz;
  double gnorm = F.dual_norm(g, &riesz, lin);
  double val = F.value(u);
  std::vector<double> d, trial(n);
  int stalls = 0;
  for (int it = 0; it < max_iterations; ++it) {
    if (gnorm <= tol) {
      out.gradient_norm = gnorm;
      out.iterations = it;
      return out;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 0) {
        if (!F.newton_direction(u, g, d, lin)) continue;
      } else {
        d.resize(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = -riesz[i];
      }
      const double slope = dot(g, d);
      if (!(slope < 0.0)) continue;
      const double slack = 1e-14 * std::max(1.0, std::abs(val));
      for (double t = 1.0; t >= 1e-12; t *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * d[i];
        const double tv = F.value(trial);
        if (!std::isfinite(tv)) continue;
        const bool armijo = tv <= val + 1e-4 * t * slope;
        bool roundoff = false;
        if (!armijo && tv <= val + slack) {
          // Near the optimum the decrease drowns in round-off; accept steps
          // that still shrink the gradient.
          std::vector<double> tg = F.gradient(trial);
          roundoff = F.dual_norm(tg, nullptr, lin) < gnorm;
        }
        if (armijo || roundoff) {
          u = trial;
          val = tv;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (++stalls > 2) break;
    } else {
      stalls = 0;
    }
    g = F.gradient(u);
    gnorm = F.dual_norm(g, &riesz, lin);
    out.iterations = it + 1;
  }
  out.gradient_norm = gnorm;
  if (gnorm > tol) {
    throw ConvergenceError("minimization stalled with gradient norm " + std::to_string(gnorm) +
                           " above tolerance " + std::to_string(tol));
  }
  return out;
}

double norm_functional_value(const SourceTerm& f, const GridFunction& u, double s) {
  require_same_grid(f.values, u);
  const double h1 = h1_seminorm(u);
  return 0.5 * h1 * h1 + 0.5 * std::pow(lp_integral(u, s), 2.0 / s) - inner(f.values, u);
}

std::vector<double> weighted_source(const SourceTerm& f) {
  std::vector<double> b(f.values.size());
  const auto w = f.values.grid()->weights();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = w[i] * f.values[i];
  return b;
}

}  // namespace

double G_value(double p, const SourceTerm& f, const GridFunction& u) {
  require_exponent(p);
  return norm_functional_value(f, u, 2.0 * p / (p - 1.0));
}

double J_value(double p, const SourceTerm& f, const GridFunction& u) {
  require_exponent(p);
  return norm_functional_value(f, u, 2.0 * p / (p + 1.0));
}

MaxExtremal minimize_G(double p, const SourceTerm& f, const OptimizerOptions& opts) {
  require_exponent(p);
  require_source(f);
  const GridPtr& grid = f.values.grid();
  const double m = 2.0 * p / (p - 1.0);
  NormFunctional F(*grid, weighted_source(f), m);
  std::vector<double> u = F.poisson();
  const StageResult st = minimize_stage(F, u, opts.tol, opts.max_iterations, opts.linear);

  MaxExtremal ex;
  ex.p = p;
  ex.v0 = GridFunction(grid, u);
  const double S = lp_integral(ex.v0, m);
  ex.c1 = std::pow(S, 1.0 / m);
  const double scale = std::pow(S, -1.0 / p);
  ex.V0 = {ex.v0.map([&](double t) { return scale * std::pow(std::abs(t), 2.0 / (p - 1.0)); })};
  ex.G_value = G_value(p, f, ex.v0);
  const EnergyResult er = solve_state(ex.V0, f, opts.linear);
  ex.energy = er.energy;
  ex.consistency = std::abs(ex.G_value - ex.energy);
  ex.state_distance = h1_seminorm(er.state - ex.v0);
  ex.gradient_norm = st.gradient_norm;
  ex.iterations = st.iterations;
  if (ex.consistency > 10.0 * opts.tol) {
    throw ConvergenceError("E_f(V0) and G(v0) differ by " + std::to_string(ex.consistency));
  }
  return ex;
}

MinExtremal minimize_J(double p, const SourceTerm& f, const OptimizerOptions& opts) {
  require_exponent(p);
  require_source(f);
  if (opts.eps_schedule.empty()) throw InvalidInput("smoothing schedule is empty");
  for (std::size_t k = 0; k < opts.eps_schedule.size(); ++k) {
    const double e = opts.eps_schedule[k];
    if (!(e > 0.0) || (k > 0 && !(e < opts.eps_schedule[k - 1]))) {
      throw InvalidInput("smoothing schedule must be positive and strictly decreasing");
    }
  }
  const GridPtr& grid = f.values.grid();
  const double q = 2.0 * p / (p + 1.0);
  NormFunctional F(*grid, weighted_source(f), q);
  std::vector<double> u = F.poisson();

  MinExtremal ex;
  ex.p = p;
  for (std::size_t k = 0; k < opts.eps_schedule.size(); ++k) {
    const bool last = k + 1 == opts.eps_schedule.size();
    F.set_eps(opts.eps_schedule[k]);
    const double stage_tol = last ? opts.tol : std::max(opts.tol, 1e-6);
    const StageResult st = minimize_stage(F, u, stage_tol, opts.max_iterations, opts.linear);
    ex.iterations += st.iterations;
    ex.gradient_norm = st.gradient_norm;
  }
  ex.eps_final = opts.eps_schedule.back();
  // J(|u|) <= J(u), so a nonnegative source has a nonnegative minimizer.
  if (f.values.nonnegative()) {
    for (double& x : u) x = std::abs(x);
  }
  ex.u0 = GridFunction(grid, u);
  const double S = lp_integral(ex.u0, q);
  ex.c2 = std::pow(S, 1.0 / q);
  const double scale = std::pow(S, -1.0 / p);
  ex.W0 = {ex.u0.map([&](double t) { return scale * std::pow(std::abs(t), 2.0 / (p + 1.0)); })};
  ex.J_value = J_value(p, f, ex.u0);
  ex.energy = solve_state(ex.W0, f, opts.linear).energy;
  ex.consistency = std::abs(ex.J_value - ex.energy);
  return ex;
}

GridFunction J_euler_lagrange_residual(const MinExtremal& ex, const SourceTerm& f) {
  const double q = 2.0 * ex.p / (ex.p + 1.0);
  const double c = std::pow(ex.c2, 2.0 - q);
  GridFunction r = apply_laplacian(ex.u0) - f.values;
  r += c * signed_power(ex.u0, q);
  return r;
}

GridFunction G_euler_lagrange_residual(const MaxExtremal& ex, const SourceTerm& f) {
  return apply_laplacian(ex.v0) + hadamard(ex.V0.values, ex.v0) - f.values;
}

Potential project_max_constraint(const Potential& V, double p) {
  require_exponent(p);
  if (!V.values.grid() || !V.values.finite()) throw InvalidInput("potential must be finite");
  if (V.values.is_zero()) throw InvalidInput("cannot project the zero potential");
  const double n = lp_norm(V.values, p);
  const double scale = 1.0 / std::max(1.0, n);
  return {V.values.map([scale](double x) { return scale * std::abs(x); })};
}

ReciprocalPotential project_min_constraint(const ReciprocalPotential& W, double p) {
  require_exponent(p);
  if (!W.values.grid() || !W.values.finite()) throw InvalidInput("reciprocal potential must be finite");
  if (W.values.is_zero()) throw InvalidInput("cannot project the zero reciprocal potential");
  const double scale = 1.0 / std::max(1.0, lp_norm(W.values, p));
  return {W.values.map([scale](double x) { return scale * std::abs(x); })};
}

ReciprocalPotential saturate_min_constraint(const ReciprocalPotential& W, double p) {
  require_exponent(p);
  if (!W.values.grid() || !W.values.finite()) throw InvalidInput("reciprocal potential must be finite");
  if (W.values.is_zero()) throw InvalidInput("cannot normalize the zero reciprocal potential");
  const double scale = 1.0 / lp_norm(W.values, p);
  return {W.values.map([scale](double x) { return scale * std::abs(x); })};
}

// ---------------------------------------------------------------------------

double sigma_M_trivial(double c1) { return 0.25 * std::min(c1 * c1 / 4.0, 1.0); }

double sigma_M_prime(double p, double c1) {
  require_exponent(p);
  const double pp = p / (p - 1.0);
  const double c2 = c1 * c1;
  return 0.25 * std::min({(pp - 1.0) * c2 * c2 / (8.0 * c2 + 2.0 * (p - 1.0)), 1.0, c2 / 4.0});
}

double sigma_M_doubleprime(double p, double c1) {
  require_exponent(p);
  const double c2 = c1 * c1;
  return 0.25 * std::min({(p - 1.0) * c2 * c2 / (8.0 * c2 + 2.0 * (p - 1.0)), 1.0, c2 / 4.0});
}

double sigma_M_prime_alt(double p, double c1) {
  require_exponent(p);
  const double c2 = c1 * c1;
  return std::min(c2 / (p * std::pow(4.0, p)), std::pow(2.0, -p) * std::min(c2 / 4.0, 1.0));
}

double sigma_M_doubleprime_alt(double p, double c1) {
  require_exponent(p);
  const double pp = p / (p - 1.0);
  const double c2 = c1 * c1;
  return std::min(c2 / (pp * std::pow(4.0, pp)), std::pow(2.0, -pp) * std::min(c2 / 4.0, 1.0));
}

ConstantsMax constants_max(const MaxExtremal& ex) {
  ConstantsMax c;
  c.p = ex.p;
  c.c1 = ex.c1;
  c.sigma_M_prime = sigma_M_prime(ex.p, ex.c1);
  c.sigma_M_doubleprime = sigma_M_doubleprime(ex.p, ex.c1);
  if (ex.p >= 2.0) {
    c.sigma_alt = sigma_M_prime_alt(ex.p, ex.c1);
    c.alt_exponent = ex.p;
  } else {
    c.sigma_alt = sigma_M_doubleprime_alt(ex.p, ex.c1);
    c.alt_exponent = ex.p / (ex.p - 1.0);
  }
  c.threshold = std::min(ex.c1 * ex.c1 / 4.0, 1.0);
  return c;
}

double c3_constant(double f_dual_norm) {
  if (!(f_dual_norm > 0.0)) throw InvalidInput("c3 needs a nonzero source norm");
  const double r2 = std::sqrt(2.0);
  return std::min(r2 / (r2 + 3.0 * f_dual_norm), 1.0 / (3.0 * r2 * f_dual_norm));
}

double beta_exponent(double p) {
  require_exponent(p);
  return 2.0 * p * (p + 1.0) / (p - 1.0);
}

ConstantsMin constants_min(double p, double c2, double c4, double f_dual_norm, double s, double T) {
  require_exponent(p);
  if (!(c2 > 0.0) || !(c4 > 0.0) || !std::isfinite(c4)) {
    throw InvalidInput("constants need c2 > 0 and finite c4 > 0");
  }
  ConstantsMin c;
  c.p = p;
  c.f_dual_norm = f_dual_norm;
  c.sobolev_exponent = s;
  c.sobolev_constant = T;
  c.c2 = c2;
  c.c3 = c3_constant(f_dual_norm);
  c.c4 = c4;
  const double c22 = c2 * c2;
  c.c5 = std::min(1.0, std::pow(c22 * c.c3 / 2.0, 2.0));
  c.c6 = std::pow(1.0 + 2.0 / (p * (p + 1.0)) * std::pow(2.0 / ((p + 1.0) * c22), p),
                  -1.0 / (p + 1.0)) *
         std::pow(c22 / (p * std::pow(4.0, p + 1.0)), 1.0 / (p + 1.0));
  c.c7 = std::sqrt(T / (c.c3 * c.c3 * c22 * c22 + f_dual_norm * f_dual_norm)) * c.c3 * c22 * c2 / 2.0;
  const double ratio = (p - 1.0) / p * c.c7 * std::pow(c2, (p - 1.0) / (p + 1.0)) / c4;
  c.c8 = std::pow(0.25 * std::pow(ratio, (p - 1.0) / p), 1.0 / (p + 1.0));
  c.c9 = ratio * ratio * std::pow(0.5, 4.0 * p / (p - 1.0));
  c.beta = beta_exponent(p);
  const double damp = std::pow(4.0, -p * (p + 1.0) / (p - 1.0));
  c.footnote_threshold = std::pow(2.0 * c.c7 * std::pow(c2, (p - 1.0) / (p + 1.0)) / c4, 2.0);
  c.sigma_m = std::min({std::pow((c.c6 + c.c8) / (c.c6 * c.c8) + 4.0 / c22, -c.beta),
                        c.c5 * damp, c.footnote_threshold * damp});

  // State-function estimate: below tau the proof's chain gives c_main, above
  // it the a priori bounds |u - u0|_{H^1_0} <= 2|f| and |u - u0|_q <= sqrt2 |f|.
  const double tau = std::min(c.c5, c.footnote_threshold);
  const double e = (p - 1.0) / (2.0 * p);
  const double c_main =
      1.0 / (2.0 + 2.0 / (c.c3 * c.c3 * c22) + 2.0 * c22 * std::pow(c.c9, -e));
  const double c_trivial = std::pow(tau, e) / (6.0 * f_dual_norm * f_dual_norm);
  c.state_constant = std::min(c_main, c_trivial);
  return c;
}

ConstantsMin constants_min(const MinExtremal& ex, const SourceTerm& f, const SolverOptions& opts) {
  const SobolevPair sp = sobolev_pair(*ex.u0.grid());
  const double sprime = sp.s / (sp.s - 1.0);
  const double p = ex.p;
  const GridFunction g = ex.u0.map([p](double t) { return std::pow(std::abs(t), (p - 1.0) / (p + 1.0)); });
  const double c4 = lp_norm(g, sprime);
  return constants_min(p, ex.c2, c4, dual_norm(f, opts), sp.s, sp.T);
}

}  // namespace qstab
