#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "pks/field.hpp"

namespace pks {

// ---------------------------------------------------------------------------
// Transforms

inline Spectrum to_spectral(const Field& f) {
  require(f.all_finite(), ErrorCode::NonFiniteField, "physical field contains non-finite values");
  const auto& grid = f.grid();
  Spectrum out(grid);
  detail::plans_for(grid)->forward(f.data(), out.data());
  out *= 1.0 / static_cast<double>(grid.size());
  return out;
}

inline Field to_physical(const Spectrum& s) {
  require(s.all_finite(), ErrorCode::NonFiniteField, "spectrum contains non-finite values");
  const auto& grid = s.grid();
  ComplexBuffer scratch(s.coeffs().begin(), s.coeffs().end());
  Field out(grid);
  detail::plans_for(grid)->backward(scratch.data(), out.data());
  return out;
}

// ---------------------------------------------------------------------------
// Multipliers

/// (i k)^order along one axis. Odd orders vanish on the Nyquist wavenumber,
/// which has no well-defined sign.
inline Complex derivative_multiplier(const TorusGrid& grid, int k, int order) {
  if (order == 0) return {1.0, 0.0};
  if (order % 2 == 1 && grid.is_nyquist(k)) return {0.0, 0.0};
  const double mag = std::pow(static_cast<double>(k), order);
  switch (order % 4) {
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

inline double wavenumber_squared(const std::array<int, 3>& k) {
  return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
         static_cast<double>(k[2]) * k[2];
}

/// 2/3 rule: a mode survives only if every |k_axis| <= N/3.
inline bool survives_dealias(const TorusGrid& grid, const std::array<int, 3>& k) {
  for (int a = 0; a < grid.dim(); ++a)
    if (3 * std::abs(k[a]) > grid.n()) return false;
  return true;
}

template <class Fn>
void apply_multiplier(Spectrum& s, Fn&& fn) {
  const auto& grid = s.grid();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= fn(grid.wavevector(i));
}

// ---------------------------------------------------------------------------
// Operators

inline Spectrum derivative(Spectrum s, int axis, int order) {
  const auto& grid = s.grid();
  require(axis >= 0 && axis < grid.dim(), ErrorCode::InvalidArgument, "derivative axis out of range");
  require(order >= 1, ErrorCode::InvalidArgument, "derivative order must be >= 1");
  apply_multiplier(s, [&](const std::array<int, 3>& k) { return derivative_multiplier(grid, k[axis], order); });
  return s;
}

inline Field derivative(const Field& f, int axis, int order) {
  return to_physical(derivative(to_spectral(f), axis, order));
}

inline Spectrum dealias(Spectrum s) {
  const auto& grid = s.grid();
  apply_multiplier(s, [&](const std::array<int, 3>& k) { return survives_dealias(grid, k) ? 1.0 : 0.0; });
  return s;
}

/// Mean-zero solution e of -Δe = f - mean(f).
inline Spectrum solve_poisson(Spectrum s) {
  apply_multiplier(s, [](const std::array<int, 3>& k) {
    const double k2 = wavenumber_squared(k);
    return k2 == 0.0 ? 0.0 : 1.0 / k2;
  });
  return s;
}

inline Field solve_poisson(const Field& f) { return to_physical(solve_poisson(to_spectral(f))); }

/// Exact solution operator of ∂_t h = A^{-1} Δh over time t.
inline Spectrum heat_propagate(Spectrum s, double t, double A) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument, "heat propagation time must be finite and >= 0");
  require(std::isfinite(A) && A > 0.0, ErrorCode::InvalidArgument, "A must be finite and > 0");
  if (t == 0.0) return s;
  apply_multiplier(s, [&](const std::array<int, 3>& k) { return std::exp(-t * wavenumber_squared(k) / A); });
  return s;
}

inline Field heat_propagate(const Field& f, double t, double A) {
  if (t == 0.0) {
    require(std::isfinite(A) && A > 0.0, ErrorCode::InvalidArgument, "A must be finite and > 0");
    return f;
  }
  return to_physical(heat_propagate(to_spectral(f), t, A));
}

inline std::vector<Field> gradient(const Spectrum& s) {
  std::vector<Field> g;
  g.reserve(s.grid().dim());
  for (int a = 0; a < s.grid().dim(); ++a) g.push_back(to_physical(derivative(s, a, 1)));
  return g;
}

inline std::vector<Field> gradient(const Field& f) { return gradient(to_spectral(f)); }

// ---------------------------------------------------------------------------
// Reductions

inline double integral(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

inline double mean(const Field& f) { return integral(f) / f.grid().volume(); }

inline double min_value(const Field& f) { return *std::min_element(f.values().begin(), f.values().end()); }
inline double max_value(const Field& f) { return *std::max_element(f.values().begin(), f.values().end()); }

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * f.grid().cell_volume());
}

/// ‖f‖₂ from the coefficients (Parseval): ∫|f|² = |T^d| Σ_k |c_k|².
inline double l2_norm(const Spectrum& s) {
  const auto& grid = s.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += grid.hermitian_weight(i) * std::norm(s[i]);
  return std::sqrt(sum * grid.volume());
}

/// L^p norm by grid quadrature; p = +inf gives the grid maximum of |f|.
inline double lp_norm(const Field& f, double p) {
  require(p >= 1.0, ErrorCode::InvalidArgument, "L^p norm needs p >= 1");
  if (std::isinf(p)) return max_abs(f);
  double sum = 0.0;
  for (double v : f.values()) sum += std::pow(std::abs(v), p);
  return std::pow(sum * f.grid().cell_volume(), 1.0 / p);
}

/// Pointwise Euclidean magnitude of a vector field.
inline Field magnitude(const std::vector<Field>& components) {
  require(!components.empty(), ErrorCode::InvalidArgument, "empty vector field");
  Field out(components.front().grid());
  for (const auto& c : components)
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += c[p] * c[p];
  for (auto& v : out.values()) v = std::sqrt(v);
  return out;
}

}  // namespace pks
