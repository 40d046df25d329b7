#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>

#include "pks/fft.hpp"
#include "pks/grid.hpp"

namespace pks {

/// Real scalar field in physical space.
class Field {
 public:
  explicit Field(TorusGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}
  Field(TorusGrid grid, double value) : grid_(grid), values_(grid.size(), value) {}
  Field(TorusGrid grid, RealBuffer values) : grid_(grid), values_(std::move(values)) {
    require(values_.size() == grid_.size(), ErrorCode::InvalidArgument, "field size does not match grid");
  }

  /// Samples fn(x, y, z) at the grid nodes; unused coordinates are passed as 0.
  template <class Fn>
  static Field sample(const TorusGrid& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto idx = grid.indices(p);
      f.values_[p] = fn(grid.coordinate(idx[0]), grid.coordinate(idx[1]), grid.coordinate(idx[2]));
    }
    return f;
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t p) noexcept { return values_[p]; }
  double operator[](std::size_t p) const noexcept { return values_[p]; }
  double& at(int i, int j = 0, int l = 0) noexcept { return values_[grid_.linear_index(i, j, l)]; }
  double at(int i, int j = 0, int l = 0) const noexcept { return values_[grid_.linear_index(i, j, l)]; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t p = 0; p < size(); ++p) values_[p] += o.values_[p];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t p = 0; p < size(); ++p) values_[p] -= o.values_[p];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (auto& v : values_) v *= s;
    return *this;
  }
  Field& operator+=(double s) noexcept {
    for (auto& v : values_) v += s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator+(Field a, double s) { return a += s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

 private:
  void check_same(const Field& o) const {
    require(grid_ == o.grid_, ErrorCode::InvalidArgument, "fields live on different grids");
  }

  TorusGrid grid_;
  RealBuffer values_;
};

/// Fourier-series coefficients of a real field, f(x) = Σ_k c_k e^{ik·x}, in
/// the half layout of TorusGrid. The k = 0 coefficient is the spatial mean.
class Spectrum {
 public:
  explicit Spectrum(TorusGrid grid) : grid_(grid), coeffs_(grid.spectral_size(), Complex{}) {}
  Spectrum(TorusGrid grid, ComplexBuffer coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    require(coeffs_.size() == grid_.spectral_size(), ErrorCode::InvalidArgument,
            "spectrum size does not match grid");
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex* data() noexcept { return coeffs_.data(); }
  const Complex* data() const noexcept { return coeffs_.data(); }
  Complex& operator[](std::size_t s) noexcept { return coeffs_[s]; }
  const Complex& operator[](std::size_t s) const noexcept { return coeffs_[s]; }

  /// Coefficient at an arbitrary wavevector; negative kx is served from the
  /// conjugate partner, so the Hermitian symmetry c_{-k} = conj(c_k) holds by
  /// construction.
  Complex coefficient(int kx, int ky = 0, int kz = 0) const {
    const int n = grid_.n();
    require((grid_.dim() >= 2 || ky == 0) && (grid_.dim() >= 3 || kz == 0), ErrorCode::InvalidArgument,
            "wavevector has components beyond the grid dimension");
    auto wrap = [n](int k) { return ((k % n) + n) % n; };
    bool conj = false;
    int ix = wrap(kx);
    if (ix > n / 2) {
      conj = true;
      ix = n - ix;
      ky = -ky;
      kz = -kz;
    }
    const std::size_t s = static_cast<std::size_t>(ix) +
                          static_cast<std::size_t>(grid_.half()) *
                              (static_cast<std::size_t>(wrap(ky)) + static_cast<std::size_t>(n) * wrap(kz));
    require(s < coeffs_.size(), ErrorCode::InvalidArgument, "wavevector outside grid");
    return conj ? std::conj(coeffs_[s]) : coeffs_[s];
  }

  Complex mean() const noexcept { return coeffs_[0]; }

  bool all_finite() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
  }

  Spectrum& operator+=(const Spectrum& o) {
    for (std::size_t s = 0; s < size(); ++s) coeffs_[s] += o.coeffs_[s];
    return *this;
  }
  Spectrum& operator*=(double v) noexcept {
    for (auto& c : coeffs_) c *= v;
    return *this;
  }

 private:
  TorusGrid grid_;
  ComplexBuffer coeffs_;
};

}  // namespace pks
