#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "pks/config.hpp"
#include "pks/model.hpp"
#include "pks/random_fields.hpp"

namespace pks {

/// Total cell mass for a config mass expressed in units of 8π per unit
/// length of each axis beyond the second: m·8π on T², m·8π·2π on T³.
inline double total_mass(double mass_units, int dim) {
  return mass_units * 8.0 * std::numbers::pi * std::pow(kTwoPi, dim - 2);
}

/// Amplitude of the x-perturbation after the smallness scaling A^{-(M+1)/2}.
inline double effective_perturbation(double eps, double A, int M) { return eps * std::pow(A, -(M + 1) / 2.0); }

namespace detail {

inline std::vector<double> periodized_gaussian(const TorusGrid& grid, double center, double width) {
  std::vector<double> g(grid.n(), 0.0);
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.coordinate(i);
    for (int image = -4; image <= 4; ++image) {
      const double d = x - center + image * kTwoPi;
      g[i] += std::exp(-d * d / (2.0 * width * width));
    }
  }
  return g;
}

}  // namespace detail

/// Gaussian of the given width centred at (π, π, π), periodized, scaled to
/// total mass `mass` (absolute units).
inline Field gaussian_bump(const TorusGrid& grid, double mass, double width) {
  require(width >= 3.0 * grid.spacing(), ErrorCode::UnderResolved,
          "bump width is below three grid spacings");
  const auto g = detail::periodized_gaussian(grid, std::numbers::pi, width);
  Field n(grid);
  for (std::size_t p = 0; p < n.size(); ++p) {
    const auto idx = grid.indices(p);
    double v = 1.0;
    for (int a = 0; a < grid.dim(); ++a) v *= g[idx[a]];
    n[p] = v;
  }
  n *= mass / integral(n);
  require(min_value(n) > 0.0, ErrorCode::UnderResolved, "bump underflows to zero on the grid");
  return n;
}

/// n̄(1 + eps_eff·cos x·g(Y)) with g a seeded random smooth profile in the
/// transverse variables, normalized to max |g| = 1.
inline Field perturbed_uniform(const TorusGrid& grid, double mass, double eps_eff, std::uint64_t seed) {
  require(grid.dim() >= 2, ErrorCode::InvalidArgument, "x-perturbation needs a transverse axis");
  std::mt19937_64 rng(seed);
  Field g = random_smooth_field(grid.reduced(), rng, 2);
  g *= 1.0 / max_abs(g);
  const double nbar = mass / grid.volume();
  const int n = grid.n();
  Field out(grid);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const int ix = static_cast<int>(p % n);
    out[p] = nbar * (1.0 + eps_eff * std::cos(grid.coordinate(ix)) * g[p / n]);
  }
  return out;
}

/// Initial state from the config; `A` overrides model.A for the smallness
/// scaling (sweeps regenerate the data for every member).
inline PksState make_initial(const ExperimentConfig& config, std::optional<double> A = std::nullopt) {
  const TorusGrid grid(config.grid.dim, config.grid.n_points);
  const double mass = total_mass(config.init.mass, grid.dim());
  require(mass > 0.0, ErrorCode::InvalidArgument, "requested mass must be positive");
  Field n(grid);
  switch (config.init.preset) {
    case Preset::Uniform:
      n = Field(grid, mass / grid.volume());
      break;
    case Preset::GaussianBump:
      n = gaussian_bump(grid, mass, config.init.bump_width);
      break;
    case Preset::UniformPlusXPerturb: {
      const double eps = effective_perturbation(config.init.perturb_eps, A.value_or(config.model.A), config.model.M);
      n = perturbed_uniform(grid, mass, eps, config.init.seed);
      break;
    }
  }
  return PksState(0.0, std::move(n), Field(grid));
}

}  // namespace pks
