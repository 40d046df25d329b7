#pragma once

#include <cmath>
#include <random>

#include "pks/spectral.hpp"

namespace pks {

/// Real field with random Fourier coefficients on modes |k_a| <= kmax,
/// zero mean. Deterministic for a given engine state.
inline Field random_smooth_field(const TorusGrid& grid, std::mt19937_64& rng, int kmax) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum s(grid);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto k = grid.wavevector(i);
    bool inside = true;
    for (int a = 0; a < grid.dim(); ++a) inside = inside && std::abs(k[a]) <= kmax && !grid.is_nyquist(k[a]);
    if (inside) s[i] = Complex(normal(rng), normal(rng));
  }
  return to_physical(s);
}

/// Independent uniform values in [-1, 1] at every node.
inline Field random_noise_field(const TorusGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field f(grid);
  for (auto& v : f.values()) v = uni(rng);
  return f;
}

/// f - mean(f).
inline Field mean_free(Field f) {
  const double m = mean(f);
  f += -m;
  return f;
}

}  // namespace pks
