#pragma once

#include <string>

#include "qstab/grid.hpp"

namespace qstab {

// Sharp Sobolev constant T_N = inf |grad v|_2^2 / |v|_{2*}^2, N >= 3, from
// pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}; cross-checked against the sphere
// form N(N-2)/4 |S^N|^{2/N}.
double talenti_constant(int N);
double talenti_constant_sphere_form(int N);

// An embedding |grad u|_2^2 >= T |u|_s^2 valid on the grid's domain.
// N >= 3 uses s = 2* and T = T_N; the interval and the square use s = 2 and
// the discrete Dirichlet ground value, which is exact for the grid.
struct SobolevPair {
  double s;
  double T;
  std::string source;
};
SobolevPair sobolev_pair(const Grid& grid);

}  // namespace qstab
