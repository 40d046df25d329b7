#pragma once

#include <cmath>
#include <string>

#include "pks/field.hpp"

namespace pks {

/// Rescaled: ∂_t n + u∂_x n = A^{-1}(Δn - ∇·(n∇C)), the internal form.
/// Unscaled: the same dynamics reported in time t_unscaled = t_rescaled / A.
enum class Form { Rescaled, Unscaled };

inline std::string to_string(Form f) { return f == Form::Rescaled ? "Rescaled" : "Unscaled"; }

struct ModelParams {
  double A = 1024.0;
  Form form = Form::Rescaled;
  int M = 3;
  // Heun is not stable on the imaginary axis; at 0.1 the growth of the
  // highest retained x-modes stays below their diffusive damping
  double cfl = 0.1;
  double dt_min = 1e-10;
  double dt_max = 0.1;
  bool dealias = true;

  /// Factor converting user-facing times into rescaled solver time.
  double time_scale() const noexcept { return form == Form::Unscaled ? A : 1.0; }

  void validate() const {
    require(std::isfinite(A) && A >= 1.0, ErrorCode::InvalidArgument, "A must be >= 1");
    require(M >= 3, ErrorCode::InvalidArgument, "M must be >= 3");
    require(cfl > 0.0 && cfl <= 1.0, ErrorCode::InvalidArgument, "cfl must lie in (0, 1]");
    require(dt_min > 0.0 && dt_max >= dt_min, ErrorCode::InvalidArgument, "need 0 < dt_min <= dt_max");
  }
};

/// Which equations a state carries.
///   Full      axis 0 is x; the shear flow advects along x.
///   Averaged  the grid is the (y, z) plane of x-averages; no flow.
///   Passive   only n is evolved, as a passive scalar; C stays zero.
enum class System { Full, Averaged, Passive };

struct PksState {
  double t = 0.0;  // rescaled time
  Field n;
  Field C;

  PksState(double time, Field density, Field chemical) : t(time), n(std::move(density)), C(std::move(chemical)) {
    require(n.grid() == C.grid(), ErrorCode::InvalidArgument, "n and C live on different grids");
  }

  const TorusGrid& grid() const noexcept { return n.grid(); }
};

}  // namespace pks
