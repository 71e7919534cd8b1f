#pragma once

#include <string>
#include <vector>

#include "qstab/grid.hpp"
#include "qstab/schrodinger.hpp"

namespace qstab {

struct OptimizerOptions {
  double tol = 1e-8;  // W^{-1,2} dual norm of the gradient at exit
  int max_iterations = 100000;
  // Smoothing levels for J, each stage warm-started from the previous one.
  std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10};
  SolverOptions linear{1e-12, 100000};
};

// Maximizer of the energy over ||V||_p <= 1, built from the minimizer v0 of
// G(u) = 1/2 |grad u|^2 + 1/2 (int |u|^m)^{2/m} - <f,u>, m = 2p/(p-1).
struct MaxExtremal {
  GridFunction v0;
  Potential V0;
  double p = 0.0;
  double c1 = 0.0;           // (int |v0|^m)^{1/m}
  double G_value = 0.0;
  double energy = 0.0;       // E_f(V0) from a linear solve
  double consistency = 0.0;  // |G_value - energy|
  double state_distance = 0.0;  // |u_{V0} - v0|_{H^1_0}
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Minimizer of the energy over V >= 0, ||1/V||_p <= 1, built from the
// minimizer u0 of J(u) = 1/2 |grad u|^2 + 1/2 (int |u|^q)^{2/q} - <f,u>,
// q = 2p/(p+1). W0 = 1/U0 vanishes where u0 does.
struct MinExtremal {
  GridFunction u0;
  ReciprocalPotential W0;
  double p = 0.0;
  double c2 = 0.0;  // (int |u0|^q)^{1/q}
  double J_value = 0.0;
  double energy = 0.0;
  double consistency = 0.0;
  double gradient_norm = 0.0;
  double eps_final = 0.0;
  int iterations = 0;
};

double G_value(double p, const SourceTerm& f, const GridFunction& u);
double J_value(double p, const SourceTerm& f, const GridFunction& u);

MaxExtremal minimize_G(double p, const SourceTerm& f, const OptimizerOptions& opts = {});
MinExtremal minimize_J(double p, const SourceTerm& f, const OptimizerOptions& opts = {});

// -Delta u0 + c2^{2-q} u0^{q-1} - f at every node (q = 2p/(p+1)).
GridFunction J_euler_lagrange_residual(const MinExtremal& ex, const SourceTerm& f);
// -Delta v0 + V0 v0 - f at every node.
GridFunction G_euler_lagrange_residual(const MaxExtremal& ex, const SourceTerm& f);

// |V| / max(1, ||V||_p).
Potential project_max_constraint(const Potential& V, double p);
// |W| / max(1, ||W||_p).
ReciprocalPotential project_min_constraint(const ReciprocalPotential& W, double p);
// |W| / ||W||_p.
ReciprocalPotential saturate_min_constraint(const ReciprocalPotential& W, double p);

// Constants of the maximization side.
double sigma_M_prime(double p, double c1);
double sigma_M_doubleprime(double p, double c1);
// Trivial-branch value 1/4 min{c1^2/4, 1}; also the gap threshold is
// min{c1^2/4, 1}.
double sigma_M_trivial(double c1);
// Constants for the second distance flavor: ||V - V0||_p^p (p >= 2) and
// || |V|^{p-2} V - V0^{p-1} ||_{p'}^{p'} (p < 2).
double sigma_M_prime_alt(double p, double c1);
double sigma_M_doubleprime_alt(double p, double c1);

struct ConstantsMax {
  double p = 0.0;
  double c1 = 0.0;
  double sigma_M_prime = 0.0;        // p >= 2, exponent 2
  double sigma_M_doubleprime = 0.0;  // p < 2, exponent 2
  double sigma_alt = 0.0;            // second flavor for the active regime
  double alt_exponent = 0.0;         // p (p >= 2) or p' (p < 2)
  double threshold = 0.0;            // min{c1^2/4, 1}
};
ConstantsMax constants_max(const MaxExtremal& ex);

double c3_constant(double f_dual_norm);
double beta_exponent(double p);

struct ConstantsMin {
  double p = 0.0;
  double f_dual_norm = 0.0;
  double sobolev_exponent = 0.0;  // s in |grad u|^2 >= T |u|_s^2
  double sobolev_constant = 0.0;  // T
  double c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0, c7 = 0.0, c8 = 0.0, c9 = 0.0;
  double beta = 0.0;
  double sigma_m = 0.0;
  double footnote_threshold = 0.0;  // (2 c7 c2^{(p-1)/(p+1)} / c4)^2
  double state_constant = 0.0;      // c in the state-function estimate
};
// Constants from explicit inputs; s and T describe the Sobolev embedding used.
ConstantsMin constants_min(double p, double c2, double c4, double f_dual_norm, double s, double T);
ConstantsMin constants_min(const MinExtremal& ex, const SourceTerm& f,
                           const SolverOptions& opts = {});

}  // namespace qstab
