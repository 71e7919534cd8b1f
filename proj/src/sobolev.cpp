#include "qstab/sobolev.hpp"

#include <cmath>
#include <numbers>

#include "qstab/errors.hpp"

namespace qstab {

namespace {

double gamma_form(int N) {
  const double n = N;
  return std::numbers::pi * n * (n - 2.0) *
         std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2.0 / n);
}

}  // namespace

double talenti_constant_sphere_form(int N) {
  if (N < 3) throw InvalidInput("sharp Sobolev constant needs N >= 3");
  const double n = N;
  const double sphere = 2.0 * std::pow(std::numbers::pi, (n + 1.0) / 2.0) / std::tgamma((n + 1.0) / 2.0);
  return n * (n - 2.0) / 4.0 * std::pow(sphere, 2.0 / n);
}

double talenti_constant(int N) {
  if (N < 3) throw InvalidInput("sharp Sobolev constant needs N >= 3");
  const double a = gamma_form(N);
  const double b = talenti_constant_sphere_form(N);
  if (std::abs(a - b) > 1e-10 * a) {
    throw ConvergenceError("Sobolev constant closed forms disagree");
  }
  return a;
}

SobolevPair sobolev_pair(const Grid& grid) {
  const int N = grid.dimension();
  if (N >= 3) return {2.0 * N / (N - 2.0), talenti_constant(N), "sharp Sobolev"};
  return {2.0, grid.laplacian_ground_value(), "discrete Poincare"};
}

}  // namespace qstab
