#pragma once

#include <optional>
#include <string>

#include "qstab/grid.hpp"

namespace qstab {

// Potential V, possibly sign-changing.
struct Potential {
  GridFunction values;
};

// Source term f, realized as a grid function.
struct SourceTerm {
  GridFunction values;
};

// W = 1/V for the minimization class; W = 0 encodes V = +infinity.
struct ReciprocalPotential {
  GridFunction values;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 100000;
};

struct AdmissibilityCertificate {
  bool coercive = false;
  double margin = 0.0;  // estimate of the smallest eigenvalue of -Delta_h + V
  int iterations = 0;
};

struct EnergyResult {
  GridFunction state;
  double energy = 0.0;         // -1/2 <f, u>
  double energy_direct = 0.0;  // 1/2 |grad u|^2 + 1/2 int V u^2 - <f, u>
  double residual = 0.0;       // relative residual of the linear solve
  int iterations = 0;
};

// Smallest eigenvalue of the discrete Dirichlet Laplacian (closed form on
// cartesian grids, inverse iteration on the radial grid).
double laplacian_ground_value(const Grid& grid);

AdmissibilityCertificate check_admissible(const Potential& V);
AdmissibilityCertificate check_admissible(const Potential& V, const SourceTerm& f);

EnergyResult solve_state(const Potential& V, const SourceTerm& f, const SolverOptions& opts = {});
// Solve with V = 1/W on {W > 0} and u = 0 where W = 0.
EnergyResult solve_state(const ReciprocalPotential& W, const SourceTerm& f,
                         const SolverOptions& opts = {});

// Riesz representative phi of f (-Delta_h phi = f) and |f|_{W^{-1,2}} = |phi|_{H^1_0}.
GridFunction riesz_representative(const SourceTerm& f, const SolverOptions& opts = {});
double dual_norm(const SourceTerm& f, const SolverOptions& opts = {});
// Dual norm of a coefficient-space vector r: sqrt(r^T K^{-1} r).
double dual_norm_coefficients(const Grid& grid, std::span<const double> r,
                              const SolverOptions& opts = {});

// Factor F with |u_V|_{H^1_0} <= F |f|_{W^{-1,2}}.
struct CoercivityFactor {
  double factor = 1.0;
  std::string source;  // "nonnegative", "sobolev" or "spectral"
};
CoercivityFactor coercivity_factor(const Potential& V, const SolverOptions& opts = {});

struct EnergyEstimateReport {
  double state_norm = 0.0;
  double source_dual_norm = 0.0;
  double factor = 1.0;
  std::string factor_source;
  double bound = 0.0;
  double margin = 0.0;  // bound - state_norm
  bool passed = false;
};
EnergyEstimateReport energy_estimate_check(const Potential& V, const SourceTerm& f,
                                           const SolverOptions& opts = {});

struct WeightedGapReport {
  double lhs = 0.0;  // |int V1 u1^2 - int V2 u2^2|
  double constant = 3.0;
  double bound = 0.0;  // C |f|_{-1} |u1 - u2|_{H^1_0}
  double margin = 0.0;
  bool passed = false;
};
WeightedGapReport weighted_l2_gap(const Potential& V1, const Potential& V2, const SourceTerm& f,
                                  const SolverOptions& opts = {});

struct EnergyDifferenceReport {
  double delta_energy = 0.0;  // E(V1) - E(V2)
  double identity_rhs = 0.0;  // 1/2 int (V1 - V2) u1 u2
  double identity_error = 0.0;
  double weighted_bound = 0.0;   // 1/2 sqrt(int |V1-V2| u1^2) sqrt(int |V1-V2| u2^2)
  double lipschitz_bound = 0.0;  // 1/2 |V1-V2|_p |u1|_{2p/(p-1)} |u2|_{2p/(p-1)}
  bool identity_passed = false;
  bool bounds_passed = false;
};
EnergyDifferenceReport energy_difference_identity(const Potential& V1, const Potential& V2,
                                                  const SourceTerm& f, double p,
                                                  const SolverOptions& opts = {});

// Direct value of the quadratic functional at u.
double energy_functional(const Potential& V, const SourceTerm& f, const GridFunction& u);
double energy_functional(const ReciprocalPotential& W, const SourceTerm& f, const GridFunction& u);

// int V u^2 with V = 1/W on the support of W.
double reciprocal_weighted_integral(const ReciprocalPotential& W, const GridFunction& u);

}  // namespace qstab
