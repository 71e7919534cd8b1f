#pragma once

#include <string>
#include <vector>

#include "qstab/grid.hpp"
#include "qstab/inequalities.hpp"

namespace qstab {

// -u'' - ((N-1)/rho) u' + a u^{q-1} = f on [0, truncation_radius), with
// u'(0) = 0 and u(truncation_radius) = 0. The source satisfies
// |f(rho)| <= b rho^{-alpha} for rho >= R.
struct RadialProblem {
  int N = 3;
  double q = 1.5;
  double a = 1.0;
  double b = 0.0;  // recorded tail constant C
  double alpha = 3.0;
  double R = 1.0;
  GridFunction source;
  double truncation_radius = 0.0;
};

// Builds a problem on a radial grid. When b <= 0 the tail constant is
// measured as max_{rho >= R} |f| rho^alpha; otherwise the given b is checked
// against the samples. Does not enforce the decay hypothesis.
RadialProblem make_radial_problem(const GridFunction& source, double q, double a, double alpha, double R,
                                  double b = 0.0);

// Throws InvalidInput unless alpha > (N+2)/2 and the tail bound holds.
void require_decay_hypothesis(const RadialProblem& prob);

// C (1 + rho^2)^{-alpha/2}; |f| <= C rho^{-alpha} everywhere.
GridFunction power_tail_source(const GridPtr& grid, double C, double alpha);

// Damped Newton on the discrete weak form K u + a W g(u) = W f with the odd
// extension g(u) = |u|^{q-2} u. Stops when every node satisfies
// |residual_i| / w_i <= tol (|f_i| + a |u_i|^{q-1} + |(K u)_i| / w_i).
// Steps are halved until the residual decreases, down to 2^-20; the Jacobian
// evaluates (q-1)|u|^{q-2} at max(|u|, 1e-14).
GridFunction solve_semilinear_radial(const RadialProblem& prob, double tol = 1e-10,
                                     int max_iterations = 200);

// Pointwise strong residual -Delta u + a g(u) - f.
GridFunction semilinear_residual(const RadialProblem& prob, const GridFunction& u);

struct LinftyReport {
  double M = 0.0;
  double inner_max = 0.0;      // max of u on rho < R
  double tail_threshold = 0.0; // (c2^{q-2} C R^{-alpha})^{1/(q-1)}
  double max_u = 0.0;
  double slack = 0.0;  // M - max_u
  bool passed = false;
};
// The equation coefficient is a = c2^{2-q}; c2 = a^{1/(2-q)} by default.
LinftyReport linfty_bound(const GridFunction& u, const RadialProblem& prob, double c2, double tol = 1e-10);
double c2_from_coefficient(const RadialProblem& prob);

struct ComparisonReport {
  bool found = false;
  double T = 0.0;
  double scale = 0.0;        // T^{2/(2-q)}
  double worst_ratio = 0.0;  // max u / w_T at the accepted T
  double T1 = 0.0;           // max{R, (2^{alpha/2} C R^{-alpha})^{(2-q)/(2q-2)}}
  bool truncation_adequate = false;
  bool passed = false;
  std::string note;
  GridFunction w;  // comparison profile
};
// Solves -Delta w + c2^{2-q} w^{q-1} = (1+rho^2)^{-alpha/2} on the same
// grid, then searches T in {1, 2, 4, ..., 2^max_doublings} for the smallest
// T with u(rho) <= T^{2/(2-q)} w(rho/T) at every node (w interpolated
// linearly). The truncation is adequate when the fit window [2 max{R, T1},
// 0.8 truncation_radius] is nonempty, i.e. the tail where h_T >= f is
// guaranteed actually lies inside the domain.
ComparisonReport comparison_check(const GridFunction& u, const RadialProblem& prob, double c2,
                                  int max_doublings = 20, double tol = 1e-10);
// Same search against a precomputed comparison profile.
ComparisonReport comparison_against(const GridFunction& u, const GridFunction& w, const RadialProblem& prob,
                                    int max_doublings = 20, double tol = 1e-10);

struct DecayFit {
  double lo = 0.0, hi = 0.0;  // fit range
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;            // residual of the log-log fit
  double expected_slope = 0.0; // -alpha/(q-1)
  bool slope_ok = false;       // |slope - expected| <= 0.1 |expected|
  bool power_law = false;      // rms <= kPowerLawRms
  int nodes = 0;
};
constexpr double kPowerLawRms = 0.1;
// Fits log u against log rho on [lo, hi]; lo, hi <= 0 select the default
// window [2R, 0.8 truncation_radius].
DecayFit decay_fit(const GridFunction& u, const RadialProblem& prob, double lo = 0.0, double hi = 0.0);

// beta_{i+1} = (gamma + beta_i)/2 from beta_0 = 2(N-1)/(2+q).
std::vector<double> bootstrap_exponents(int N, double q, double gamma, int steps);

struct BootstrapReport {
  double beta0 = 0.0;
  double gamma = 0.0;
  bool nothing_to_prove = false;  // gamma <= beta0
  DeficitReport strauss;           // u^{2+q} <= S |u|^2_{H^1_0} |u|_q^q rho^{-2(N-1)}
  std::vector<double> exponents;   // beta_0, ..., beta_5
  std::vector<double> constants;   // fitted C_i
  std::vector<bool> verified;
  int steps_verified = 0;          // consecutive verified steps after beta_0
  double deepest = 0.0;
};
// On the tail window [2R, 0.8 truncation_radius] with geometric midpoint r_m:
// C_i = max_{[2R, r_m]} u rho^{beta_i}, and step i is verified when
// u <= C_i rho^{-beta_i} (1 + tol) on [r_m, 0.8 truncation_radius].
BootstrapReport weak_decay_bootstrap(const GridFunction& u, const RadialProblem& prob, int steps = 5,
                                     double tol = 1e-8);

}  // namespace qstab
