#include "qstab/random_fields.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace qstab {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GridFunction random_smooth_field(const GridPtr& grid, Rng& rng, bool vanishing, int modes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  GridFunction out(grid);

  if (grid->radial()) {
    const double R = grid->domain().truncation_radius;
    std::vector<double> a(modes);
    for (int k = 0; k < modes; ++k) a[k] = normal(rng) / ((k + 1.0) * (k + 1.0));
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double rho = grid->coordinate(i, 0);
      double s = 0.0;
      for (int k = 0; k < modes; ++k) {
        if (vanishing) {
          const double x = (k + 1) * pi * rho / R;
          s += a[k] * (x == 0.0 ? 1.0 : std::sin(x) / x);
        } else {
          s += a[k] * std::cos(k * pi * rho / R);
        }
      }
      out[i] = s;
    }
    return out;
  }

  const int na = grid->axes();
  std::size_t total = 1;
  for (int a = 0; a < na; ++a) total *= static_cast<std::size_t>(modes);
  std::vector<double> coef(total);
  std::vector<int> k(na);
  for (std::size_t m = 0; m < total; ++m) {
    std::size_t rem = m;
    double k2 = 0.0;
    for (int a = 0; a < na; ++a) {
      k[a] = static_cast<int>(rem % modes) + 1;
      rem /= modes;
      k2 += static_cast<double>(k[a]) * k[a];
    }
    coef[m] = normal(rng) / k2;
  }

  // Tabulate the per-axis mode values, then sum the tensor products.
  std::vector<std::vector<double>> basis(na);
  for (int a = 0; a < na; ++a) {
    const double L = grid->domain().extents[a];
    basis[a].resize(static_cast<std::size_t>(grid->points(a)) * modes);
    for (int j = 0; j < grid->points(a); ++j) {
      const double x = (j + 1) * grid->spacing(a);
      for (int kk = 0; kk < modes; ++kk) {
        basis[a][j * modes + kk] = vanishing ? std::sin((kk + 1) * pi * x / L)
                                             : std::cos(kk * pi * x / L);
      }
    }
  }
  std::vector<int> idx(na);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    std::size_t rem = i;
    for (int a = 0; a < na; ++a) {
      idx[a] = static_cast<int>(rem % grid->points(a));
      rem /= grid->points(a);
    }
    double s = 0.0;
    for (std::size_t m = 0; m < total; ++m) {
      std::size_t r2 = m;
      double prod = coef[m];
      for (int a = 0; a < na; ++a) {
        prod *= basis[a][idx[a] * modes + static_cast<int>(r2 % modes)];
        r2 /= modes;
      }
      s += prod;
    }
    out[i] = s;
  }
  return out;
}

}  // namespace qstab
