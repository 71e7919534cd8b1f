#pragma once

#include "qstab/grid.hpp"
#include "qstab/optimal.hpp"
#include "qstab/schrodinger.hpp"

namespace qstab {

// Slack used for pass/fail: margins down to -10 * kQuadratureTol pass.
inline constexpr double kQuadratureTol = 1e-9;

struct DeficitReport {
  double deficit = 0.0;
  double remainder = 0.0;
  double constant = 0.0;
  double margin = 0.0;  // deficit - constant * remainder
  bool passed = false;
};

DeficitReport make_deficit_report(double deficit, double remainder, double constant);

// Form 1: deficit 1 - int f g, remainder | |f|^{q-2} f - g |_{q'}^2,
// constant (q'-1)/4. Form 2: remainder | f - |g|^{q'-2} g |_q^q, constant
// 1/(q 2^{q-1}). Requires |f|_q = |g|_{q'} = 1; inputs within 1e-6 of unit
// norm are renormalized, others rejected. 2 <= q < inf.
DeficitReport quantitative_holder(const GridFunction& f, const GridFunction& g, double q, int form);

// For |h1|_q = |h2|_q = 1, 1 < q <= 2:
// |(h1+h2)/2|_q^{q'} + |(h1-h2)/2|_q^{q'} <= 1.
// Deficit 1 - |(h1+h2)/2|_q^{q'}, remainder |(h1-h2)/2|_q^{q'}, constant 1.
DeficitReport clarkson_check(const GridFunction& h1, const GridFunction& h2, double q);

// Radial decay bound |u(rho)|^{2+q} <= S rho^{-2(N-1)} |grad u|_2^2 |u|_q^q
// with S = ((2+q) / (2 N omega_N))^2, checked at every node with rho > 0.
// The report describes the tightest node: deficit is the bound, remainder
// the left side, constant 1.
double strauss_constant(double q, int N = 3);
DeficitReport strauss_bound(const GridFunction& u, double q);

// |g0|_r <= |g|_r + |g - g0|_s | |g0|^{r-1} |_{s'} / |g0|_r^{r-1}.
// Deficit |g|_r - |g0|_r, remainder |g - g0|_s, constant -factor.
DeficitReport norm_lower_triangle(const GridFunction& g, const GridFunction& g0, double r, double s);

struct ReductionReport {
  ReciprocalPotential U;   // W / lambda, the saturated reciprocal
  double lambda = 0.0;     // |W|_p
  double weighted_integral = 0.0;  // int V u^2
  bool hypothesis_holds = false;   // int V u^2 >= beta
  double gap = 0.0;                // E_f(V) - E_f(U0)
  DeficitReport monotonicity;      // E_f(V) - E_f(U0) >= E_f(U) - E_f(U0)
  DeficitReport distance;          // (2/beta) gap >= |W - W0|_p - |W/lambda - W0|_p
};

ReductionReport reduction(const ReciprocalPotential& W, const SourceTerm& f, const MinExtremal& ex,
                          double beta, const SolverOptions& opts = {});

}  // namespace qstab
