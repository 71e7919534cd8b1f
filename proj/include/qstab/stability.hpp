#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qstab/optimal.hpp"
#include "qstab/random_fields.hpp"
#include "qstab/schrodinger.hpp"

namespace qstab {

struct StabilityReport {
  double gap = 0.0;        // oriented energy gap, >= 0 up to solver error
  double remainder = 0.0;  // distance to the extremal
  double exponent = 0.0;
  double sigma = 0.0;
  double margin = 0.0;  // gap - sigma * remainder^exponent
  bool passed = false;  // margin >= -10 tol
  std::string branch;   // which case of the proof the gap falls in
  // Largest remainder compatible with the gap: ((max(gap, 0) + 10 tol)/sigma)^{1/exponent}.
  double remainder_bound = 0.0;
};

// Distance used on the maximization side. Primary: exponent 2 with
// | |V|^{p-2}V - V0^{p-1} |_{p'} (p >= 2) or |V - V0|_p (p < 2). Alternate:
// |V - V0|_p with exponent p (p >= 2) or | |V|^{p-2}V - V0^{p-1} |_{p'} with
// exponent p' (p < 2).
enum class MaxFlavor { primary, alternate };

StabilityReport verify_max_stability(const Potential& V, const MaxExtremal& ex, const SourceTerm& f,
                                     MaxFlavor flavor = MaxFlavor::primary,
                                     const SolverOptions& opts = {});

StabilityReport verify_min_stability(const ReciprocalPotential& W, const MinExtremal& ex,
                                     const ConstantsMin& constants, const SourceTerm& f,
                                     const SolverOptions& opts = {});

struct MaxStateReport {
  double gap = 0.0;
  double distance_h1 = 0.0;  // |u - v0|_{H^1_0}
  double distance_m = 0.0;   // |u - v0|_{2p/(p-1)}
  // |u - v0|^2 <= (int |u|^m)^{2/m} - int V u^2
  double weak_lhs = 0.0, weak_rhs = 0.0;
  bool weak_passed = false;
  // gap^{1/theta} |u - v0|_m >= c |u - v0|^2_{H^1_0}, theta = max{2, p}
  double theta = 0.0, constant = 0.0, strong_lhs = 0.0, strong_rhs = 0.0;
  bool strong_passed = false;
  // On radial3d with 2p/(p-1) = 2*: gap^{1/theta} >= c sqrt(T_3) |u - v0|_{H^1_0}.
  bool sobolev_form_checked = false;
  double sobolev_lhs = 0.0, sobolev_rhs = 0.0;
  bool sobolev_passed = true;
  bool passed = false;
};
MaxStateReport verify_max_state_stability(const Potential& V, const MaxExtremal& ex,
                                          const SourceTerm& f, const SolverOptions& opts = {});

struct MinStateReport {
  double gap = 0.0;
  double lhs = 0.0;  // gap^{(p-1)/(2p)}
  double rhs = 0.0;  // c (|u - u0|^2_{H^1_0} + |u - u0|^2_{2p/(p+1)})
  double constant = 0.0;
  bool passed = false;
  // |c2^2 - |u|_q^2| <= sqrt(gap)/c3 when gap <= 1.
  bool corner_checked = false;
  double corner_lhs = 0.0, corner_rhs = 0.0;
  bool corner_passed = true;
};
MinStateReport verify_min_state_stability(const ReciprocalPotential& W, const MinExtremal& ex,
                                          const ConstantsMin& constants, const SourceTerm& f,
                                          const SolverOptions& opts = {});

struct ScalingProbe {
  std::vector<double> eps;
  std::vector<double> gaps;
  std::vector<double> remainders_primary;    // first distance flavor
  std::vector<double> remainders_alternate;  // second distance flavor
  std::vector<double> margins;               // primary stability margins
  double slope = 0.0;                        // least-squares slope of log gap vs log eps
};
// V_eps = project_max_constraint(V0 + eps psi). The direction is flipped if
// needed so that int psi V0^{p-1} >= 0, which keeps V_eps on the unit sphere.
ScalingProbe scaling_probe(const GridFunction& direction, const MaxExtremal& ex, const SourceTerm& f,
                           std::span<const double> eps_list, const SolverOptions& opts = {});
// W_eps = saturate_min_constraint(W0 + eps psi); remainders are |W_eps - W0|_p.
ScalingProbe scaling_probe(const GridFunction& direction, const MinExtremal& ex,
                           const ConstantsMin& constants, const SourceTerm& f,
                           std::span<const double> eps_list, const SolverOptions& opts = {});

// Random admissible inputs for the sweeps.
// Max side: a smooth field scaled to |V|_p = r with r uniform in [0.5, 1];
// every third sample keeps its sign, the others take |.|.
Potential random_max_potential(const GridPtr& grid, Rng& rng, double p);
// Min side: |smooth field| + floor, saturated to |W|_p = 1.
ReciprocalPotential random_min_reciprocal(const GridPtr& grid, Rng& rng, double p);
// Indicator family: V = |E|^{-1/p} on E, 0 elsewhere; W likewise encodes
// V = |E|^{1/p} on E and +inf elsewhere.
Potential indicator_potential(const GridPtr& grid, const std::function<bool(std::span<const double>)>& in_set,
                              double p);
ReciprocalPotential indicator_reciprocal(const GridPtr& grid,
                                         const std::function<bool(std::span<const double>)>& in_set,
                                         double p);

}  // namespace qstab
