#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "pks/error.hpp"

namespace pks {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Isotropic periodic grid on the torus [0, 2π)^dim.
///
/// Physical values are stored row-major with x (axis 0) fastest. Spectral
/// coefficients use the real-to-complex half layout: axis 0 keeps the
/// non-negative wavenumbers 0..N/2, the other axes keep all N wavenumbers
/// ordered 0, 1, ..., N/2, -N/2+1, ..., -1.
class TorusGrid {
 public:
  TorusGrid(int dim, int n) : dim_(dim), n_(n) {
    require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "grid dimension must be 1, 2 or 3");
    require(n >= 8 && n % 2 == 0, ErrorCode::InvalidArgument, "grid size must be even and >= 8");
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return kTwoPi / n_; }
  double volume() const noexcept { return std::pow(kTwoPi, dim_); }
  double cell_volume() const noexcept { return std::pow(spacing(), dim_); }
  double coordinate(int i) const noexcept { return i * spacing(); }

  std::size_t size() const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
    return s;
  }

  int half() const noexcept { return n_ / 2 + 1; }

  std::size_t spectral_size() const noexcept { return size() / n_ * half(); }

  /// Wavenumber stored at position `index` of a full (non-halved) axis.
  int wavenumber(int index) const noexcept { return index <= n_ / 2 ? index : index - n_; }

  bool is_nyquist(int k) const noexcept { return k == n_ / 2; }

  /// Wavevector (kx, ky, kz) of spectral slot `s`; unused axes are 0.
  std::array<int, 3> wavevector(std::size_t s) const noexcept {
    std::array<int, 3> k{0, 0, 0};
    const auto h = static_cast<std::size_t>(half());
    k[0] = static_cast<int>(s % h);
    std::size_t rest = s / h;
    for (int a = 1; a < dim_; ++a) {
      k[a] = wavenumber(static_cast<int>(rest % n_));
      rest /= n_;
    }
    return k;
  }

  /// Grid indices (i, j, l) of physical slot `p`; unused axes are 0.
  std::array<int, 3> indices(std::size_t p) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      idx[a] = static_cast<int>(p % n_);
      p /= n_;
    }
    return idx;
  }

  std::size_t linear_index(int i, int j = 0, int l = 0) const noexcept {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) *
                                             (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_) * l);
  }

  /// Multiplicity of a half-layout slot in a full-spectrum sum.
  double hermitian_weight(std::size_t s) const noexcept {
    const int kx = static_cast<int>(s % static_cast<std::size_t>(half()));
    return (kx == 0 || kx == n_ / 2) ? 1.0 : 2.0;
  }

  std::vector<double> axis_coordinates() const {
    std::vector<double> c(n_);
    for (int i = 0; i < n_; ++i) c[i] = coordinate(i);
    return c;
  }

  /// Same N with one fewer axis (the grid of an x-average).
  TorusGrid reduced() const { return TorusGrid(dim_ - 1, n_); }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int dim_;
  int n_;
};

}  // namespace pks
