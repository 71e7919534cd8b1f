#pragma once

#include <cstdint>
#include <random>

#include "qstab/grid.hpp"

namespace qstab {

using Rng = std::mt19937_64;

// Independent stream seed for instance `id` of a sweep seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id);

// Smooth random field: a sum of `modes` Fourier modes per axis with standard
// normal coefficients damped by |k|^{-2}. With vanishing = true the modes are
// Dirichlet eigenfunctions (sines, or sin(x)/x radially); otherwise cosines
// including the constant mode.
GridFunction random_smooth_field(const GridPtr& grid, Rng& rng, bool vanishing = true,
                                 int modes = 8);

}  // namespace qstab
