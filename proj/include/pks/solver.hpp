#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pks/diagnostics.hpp"
#include "pks/flows.hpp"
#include "pks/model.hpp"
#include "pks/spectral.hpp"

namespace pks {

/// Spectral working state of the integrator; t is rescaled time.
struct SpectralState {
  double t = 0.0;
  Spectrum n;
  Spectrum C;
};

/// Vector field ⟨n_≠∇C_≠⟩(t) injected into the averaged density equation.
using FluxInjection = std::function<std::vector<Field>(double t)>;

/// Guard against division by a vanishing velocity in the CFL limits.
inline constexpr double kCflEpsilon = 1e-8;

/// Integrating-factor Heun scheme for the rescaled system
///   ∂_t n = -u∂_x n + A^{-1}(Δn - ∇·(n∇C)),
///   ∂_t C = -u∂_x C + A^{-1}(ΔC + n - n̄).
/// The diffusion A^{-1}Δ is applied exactly through exp(-dt|k|²/A); the
/// advection, chemotaxis and source terms are explicit.
class Integrator {
 public:
  Integrator(TorusGrid grid, ModelParams params, FlowSpec flow, System system, FluxInjection flux = {})
      : grid_(grid), params_(params), flow_(std::move(flow)), system_(system), flux_(std::move(flux)),
        plans_(detail::plans_for(grid)), k2_(grid.spectral_size()), keep_(grid.spectral_size(), 1),
        y_(grid.axis_coordinates()), real_n_(grid.size()), real_tmp_(grid.size()),
        spec_tmp_(grid.spectral_size()), k1n_(grid), k1c_(grid), k2n_(grid), k2c_(grid) {
    params_.validate();
    require(system_ != System::Full || grid_.dim() >= 2, ErrorCode::InvalidArgument,
            "the sheared system needs a y axis");
    for (int a = 0; a < grid_.dim(); ++a) kvec_[a].resize(grid_.spectral_size());
    for (std::size_t s = 0; s < grid_.spectral_size(); ++s) {
      const auto k = grid_.wavevector(s);
      k2_[s] = wavenumber_squared(k);
      if (params_.dealias && !survives_dealias(grid_, k)) keep_[s] = 0;
      for (int a = 0; a < grid_.dim(); ++a) kvec_[a][s] = derivative_multiplier(grid_, k[a], 1).imag();
    }
    advects_ = system_ != System::Averaged && !is_zero_flow(flow_);
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }
  System system() const noexcept { return system_; }

  SpectralState to_spectral_state(const PksState& s) const {
    require(s.grid() == grid_, ErrorCode::InvalidArgument, "state grid does not match integrator grid");
    SpectralState out{s.t, to_spectral(s.n), to_spectral(s.C)};
    out.C[0] = 0.0;
    if (system_ == System::Passive) out.C = Spectrum(grid_);
    return out;
  }

  PksState to_physical_state(const SpectralState& s) const { return {s.t, to_physical(s.n), to_physical(s.C)}; }

  /// Explicit part of the right-hand side: advection, chemotaxis, source.
  void nonlinear(const SpectralState& s, Spectrum& dn, Spectrum& dC) const {
    if (dn.size() != grid_.spectral_size()) dn = Spectrum(grid_);
    if (dC.size() != grid_.spectral_size()) dC = Spectrum(grid_);
    std::fill(dn.coeffs().begin(), dn.coeffs().end(), Complex{});
    std::fill(dC.coeffs().begin(), dC.coeffs().end(), Complex{});
    const double inv_a = 1.0 / params_.A;
    backward(s.n, -1, real_n_);

    if (advects_) {
      const auto u = eval_flow(flow_, flow_clock(s.t), y_);
      times_profile(real_n_, u, real_tmp_);
      add_divergence_term(dn, 0, real_tmp_.data(), -1.0, "advection of n");
      if (system_ == System::Full) {
        backward(s.C, -1, real_tmp_);
        times_profile(real_tmp_, u, real_tmp_);
        add_divergence_term(dC, 0, real_tmp_.data(), -1.0, "advection of C");
      }
    }
    if (system_ == System::Passive) return;

    for (int a = 0; a < grid_.dim(); ++a) {
      backward(s.C, a, real_tmp_);
      for (std::size_t p = 0; p < real_tmp_.size(); ++p) real_tmp_[p] *= real_n_[p];
      add_divergence_term(dn, a, real_tmp_.data(), -inv_a, "chemotaxis");
    }
    if (flux_) {
      const auto injected = flux_(s.t);
      require(static_cast<int>(injected.size()) == grid_.dim(), ErrorCode::InvalidArgument,
              "injected flux needs one component per axis");
      for (int a = 0; a < grid_.dim(); ++a) {
        require(injected[a].grid() == grid_, ErrorCode::InvalidArgument, "injected flux grid mismatch");
        add_divergence_term(dn, a, injected[a].data(), -inv_a, "injected flux");
      }
    }
    for (std::size_t k = 1; k < dC.size(); ++k) dC[k] += inv_a * s.n[k];
    dC[0] = 0.0;
  }

  SpectralState step(const SpectralState& s, double dt) {
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "time step must be positive");
    const auto& decay = decay_factors(dt);
    nonlinear(s, k1n_, k1c_);

    SpectralState mid{s.t + dt, s.n, s.C};
    for (std::size_t k = 0; k < decay.size(); ++k) {
      mid.n[k] = decay[k] * (s.n[k] + dt * k1n_[k]);
      mid.C[k] = decay[k] * (s.C[k] + dt * k1c_[k]);
    }
    nonlinear(mid, k2n_, k2c_);

    // mid's buffers are reused for the result
    for (std::size_t k = 0; k < decay.size(); ++k) {
      mid.n[k] = decay[k] * (s.n[k] + 0.5 * dt * k1n_[k]) + 0.5 * dt * k2n_[k];
      mid.C[k] = decay[k] * (s.C[k] + 0.5 * dt * k1c_[k]) + 0.5 * dt * k2c_[k];
    }
    mid.C[0] = 0.0;
    require(mid.n.all_finite() && mid.C.all_finite(), ErrorCode::StepDiverged, "step produced non-finite values");
    return mid;
  }

  /// dt = cfl·min(Δx/‖u‖_∞, Δx/(A^{-1}‖∇C‖_∞)), capped by dt_max.
  double stable_dt(const SpectralState& s) const {
    const double dx = grid_.spacing();
    double u_max = 0.0;
    if (advects_)
      for (double v : eval_flow(flow_, flow_clock(s.t), y_)) u_max = std::max(u_max, std::abs(v));
    double drift = 0.0;
    if (system_ != System::Passive) {
      // |∇C|² accumulated in real_n_, which nonlinear() refills before use
      std::fill(real_n_.begin(), real_n_.end(), 0.0);
      for (int a = 0; a < grid_.dim(); ++a) {
        backward(s.C, a, real_tmp_, false);
        for (std::size_t p = 0; p < real_tmp_.size(); ++p) real_n_[p] += real_tmp_[p] * real_tmp_[p];
      }
      double g2 = 0.0;
      for (double v : real_n_) g2 = std::max(g2, v);
      drift = std::sqrt(g2) / params_.A;
    }
    const double dt = params_.cfl * std::min(dx / std::max(u_max, kCflEpsilon), dx / std::max(drift, kCflEpsilon));
    if (!(dt >= params_.dt_min))
      throw Error(ErrorCode::TimeStepCollapse, "adaptive time step fell below dt_min at t = " + std::to_string(s.t));
    return std::min(dt, params_.dt_max);
  }

  /// ‖n‖_∞ of a spectral state without building the whole physical state.
  double sup_density(const SpectralState& s) const {
    backward(s.n, -1, real_tmp_, false);
    double m = 0.0;
    for (double v : real_tmp_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  // u(t, y) is parametrized by the caller's clock, not the internal one
  double flow_clock(double t) const { return t / params_.time_scale(); }

  /// out(x, y, z) = f(x, y, z) · u(y); x is the fastest index.
  void times_profile(const RealBuffer& f, const std::vector<double>& u, RealBuffer& out) const {
    const auto n = static_cast<std::size_t>(grid_.n());
    for (std::size_t r = 0; r < f.size() / n; ++r) {
      const double ur = u[r % n];
      for (std::size_t x = r * n; x < (r + 1) * n; ++x) out[x] = f[x] * ur;
    }
  }

  /// out = physical values of s (axis < 0) or of ∂_axis s; dealiased if requested.
  void backward(const Spectrum& s, int axis, RealBuffer& out, bool mask = true) const {
    const bool cut = mask && params_.dealias;
    const std::size_t m = s.size();
    if (axis < 0) {
      for (std::size_t k = 0; k < m; ++k) spec_tmp_[k] = s[k];
    } else {
      const double* kv = kvec_[axis].data();
      for (std::size_t k = 0; k < m; ++k) spec_tmp_[k] = Complex(-kv[k] * s[k].imag(), kv[k] * s[k].real());
    }
    if (cut)
      for (std::size_t k = 0; k < m; ++k)
        if (!keep_[k]) spec_tmp_[k] = Complex{};
    plans_->backward(spec_tmp_.data(), out.data());
  }

  /// target += scale · ∂_axis(flux), dealiased; the k = 0 slot stays 0.
  void add_divergence_term(Spectrum& target, int axis, const double* flux, double scale, const char* term) const {
    bool finite = true;
    for (std::size_t p = 0; p < real_n_.size(); ++p) finite = finite && std::isfinite(flux[p]);
    if (!finite) throw Error(ErrorCode::NonFiniteRhs, std::string("non-finite values in ") + term);
    plans_->forward(flux, spec_tmp_.data());
    const double f = scale / static_cast<double>(grid_.size());
    const auto& kv = kvec_[axis];
    for (std::size_t k = 1; k < target.size(); ++k)
      if (keep_[k]) {
        const Complex c = spec_tmp_[k];
        target[k] += Complex(-f * kv[k] * c.imag(), f * kv[k] * c.real());
      }
  }

  const std::vector<double>& decay_factors(double dt) {
    if (dt != cached_dt_) {
      decay_.resize(k2_.size());
      for (std::size_t k = 0; k < k2_.size(); ++k) decay_[k] = std::exp(-dt * k2_[k] / params_.A);
      cached_dt_ = dt;
    }
    return decay_;
  }

  TorusGrid grid_;
  ModelParams params_;
  FlowSpec flow_;
  System system_;
  FluxInjection flux_;
  std::shared_ptr<const detail::FftPlans> plans_;
  bool advects_ = false;
  std::vector<double> k2_;
  std::vector<unsigned char> keep_;
  std::array<std::vector<double>, 3> kvec_;
  std::vector<double> y_;
  double cached_dt_ = -1.0;
  std::vector<double> decay_;
  // scratch; an Integrator is not meant to be shared between threads
  mutable RealBuffer real_n_;
  mutable RealBuffer real_tmp_;
  mutable ComplexBuffer spec_tmp_;
  Spectrum k1n_, k1c_, k2n_, k2c_;
};

// ---------------------------------------------------------------------------
// Single-call operations

struct Rhs {
  Field dn;
  Field dC;
};

/// Full right-hand side including diffusion, evaluated explicitly. Used as a
/// reference; the stepper splits the diffusion off.
inline Rhs rhs(const PksState& state, const ModelParams& params, const FlowSpec& flow,
               System system = System::Full) {
  const Integrator integ(state.grid(), params, flow, system);
  const SpectralState s = integ.to_spectral_state(state);
  Spectrum dn(state.grid()), dC(state.grid());
  integ.nonlinear(s, dn, dC);
  require(dn[0] == Complex{}, ErrorCode::NonFiniteRhs, "density tendency has a nonzero mean");
  const double inv_a = 1.0 / params.A;
  const auto& grid = state.grid();
  for (std::size_t k = 0; k < dn.size(); ++k) {
    const double lap = -wavenumber_squared(grid.wavevector(k)) * inv_a;
    dn[k] += lap * s.n[k];
    dC[k] += lap * s.C[k];
  }
  return {to_physical(dn), to_physical(dC)};
}

inline PksState step(const PksState& state, double dt, const ModelParams& params, const FlowSpec& flow,
                     System system = System::Full) {
  Integrator integ(state.grid(), params, flow, system);
  return integ.to_physical_state(integ.step(integ.to_spectral_state(state), dt));
}

/// Throws TimeStepCollapse when the CFL step falls below dt_min.
inline double adaptive_dt(const PksState& state, const ModelParams& params, const FlowSpec& flow,
                          System system = System::Full) {
  const Integrator integ(state.grid(), params, flow, system);
  return integ.stable_dt(integ.to_spectral_state(state));
}

// ---------------------------------------------------------------------------
// Runs

enum class OutcomeKind { Completed, BlowUp };

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::Completed;
  PksState final_state;
  double t_detect = 0.0;  // caller units; set for BlowUp
  std::string reason;
  double sup_n = 0.0;     // max over all steps of ‖n‖_∞
  std::vector<FunctionalValues> samples;
  std::optional<std::string> io_error;

  bool blew_up() const noexcept { return kind == OutcomeKind::BlowUp; }
};

struct RunSinks {
  std::function<void(const FunctionalValues&)> on_sample;
  std::function<void(const PksState&)> on_snapshot;
  double snapshot_every = 0.0;  // caller units; 0 disables snapshots
};

struct RunOptions {
  System system = System::Full;
  double blowup_factor = kDefaultBlowupFactor;
  std::vector<double> extra_sample_times;  // caller units, sampled in addition to the grid
  FluxInjection flux;
  bool keep_samples = true;
};

namespace detail {

class SinkGuard {
 public:
  explicit SinkGuard(std::optional<std::string>& error) : error_(error) {}

  template <class Fn, class Arg>
  void call(const Fn& fn, const Arg& arg) {
    if (!fn || error_) return;
    try {
      fn(arg);
    } catch (const std::exception& e) {
      error_ = e.what();
    }
  }

 private:
  std::optional<std::string>& error_;
};

}  // namespace detail

/// Advances to horizon T (caller units) or until blow-up is detected.
inline RunOutcome run(const PksState& init, const ModelParams& params, const FlowSpec& flow, double T,
                      double sample_every, const RunSinks& sinks = {}, const RunOptions& options = {}) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::InvalidArgument, "horizon must be positive");
  require(sample_every > 0.0, ErrorCode::InvalidArgument, "sample interval must be positive");
  const double scale = params.time_scale();
  Integrator integ(init.grid(), params, flow, options.system, options.flux);
  SpectralState s = integ.to_spectral_state(init);
  const double init_sup = max_abs(init.n);
  const bool check_blowup = options.system != System::Passive && init_sup > 0.0;

  RunOutcome out{OutcomeKind::Completed, init, 0.0, {}, init_sup, {}, std::nullopt};
  detail::SinkGuard guard(out.io_error);

  auto emit = [&](const PksState& st, double dt_used) {
    const FunctionalValues v = measure(st, options.system, params, st.t / scale, dt_used, init_sup);
    guard.call(sinks.on_sample, v);
    if (options.keep_samples) out.samples.push_back(v);
  };

  const double t_end = T * scale;
  std::vector<double> extras;
  for (double te : options.extra_sample_times)
    if (te > 0.0 && te * scale < t_end) extras.push_back(te * scale);
  std::sort(extras.begin(), extras.end());
  std::size_t next_extra = 0;
  long sample_index = 1;
  long snapshot_index = 1;
  const double snap_every = sinks.snapshot_every * scale;

  emit(integ.to_physical_state(s), 0.0);
  if (sinks.on_snapshot && snap_every > 0.0) guard.call(sinks.on_snapshot, integ.to_physical_state(s));

  const double snap_tol = 1e-12 * std::max(1.0, t_end);
  while (s.t < t_end - snap_tol) {
    const double next_sample = std::min(t_end, static_cast<double>(sample_index) * sample_every * scale);
    double target = next_sample;
    if (next_extra < extras.size()) target = std::min(target, extras[next_extra]);

    double dt = 0.0;
    try {
      dt = integ.stable_dt(s);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TimeStepCollapse) throw;
      out.kind = OutcomeKind::BlowUp;
      out.reason = "time step collapse";
      out.t_detect = s.t / scale;
      break;
    }
    dt = std::min(dt, target - s.t);
    try {
      s = integ.step(s, dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepDiverged && e.code() != ErrorCode::NonFiniteRhs &&
          e.code() != ErrorCode::NonFiniteField)
        throw;
      out.kind = OutcomeKind::BlowUp;
      out.reason = "non-finite values";
      out.t_detect = (s.t + dt) / scale;
      break;
    }
    if (target - s.t <= snap_tol) s.t = target;

    std::optional<PksState> phys;
    if (check_blowup) {
      const double sup = integ.sup_density(s);
      out.sup_n = std::max(out.sup_n, sup);
      if (sup > options.blowup_factor * init_sup) phys = integ.to_physical_state(s);
      if (auto signal = phys ? blowup_check(*phys, init_sup, options.blowup_factor) : std::nullopt) {
        out.kind = OutcomeKind::BlowUp;
        out.reason = signal->reason;
        out.t_detect = s.t / scale;
        out.final_state = std::move(*phys);
        emit(out.final_state, dt);
        return out;
      }
    }
    const bool at_sample = s.t >= next_sample - snap_tol;
    const bool at_extra = next_extra < extras.size() && s.t >= extras[next_extra] - snap_tol;
    if (at_sample || at_extra) {
      if (!phys) phys = integ.to_physical_state(s);
      emit(*phys, dt);
      if (at_sample) ++sample_index;
      if (at_extra) ++next_extra;
    }
    if (sinks.on_snapshot && snap_every > 0.0 && s.t >= snapshot_index * snap_every - snap_tol) {
      if (!phys) phys = integ.to_physical_state(s);
      guard.call(sinks.on_snapshot, *phys);
      ++snapshot_index;
    }
  }
  out.final_state = integ.to_physical_state(s);
  return out;
}

/// Two-dimensional x-averaged system in (y, z), with an optional injected
/// remainder flux (zero by default).
inline RunOutcome averaged2d_run(const PksState& init, const ModelParams& params, double T, double sample_every,
                                 const RunSinks& sinks = {}, FluxInjection remainder_flux = {}) {
  require(init.grid().dim() == 2, ErrorCode::InvalidArgument, "averaged system lives on T^2");
  RunOptions options;
  options.system = System::Averaged;
  options.flux = std::move(remainder_flux);
  return run(init, params, FlowSpec{flow::Zero{}, 0.0}, T, sample_every, sinks, options);
}

// ---------------------------------------------------------------------------
// Passive scalar

/// ‖f_≠‖₂ straight from the coefficients: every mode with kx ≠ 0.
inline double remainder_norm(const Spectrum& s) {
  const auto& grid = s.grid();
  const auto h = static_cast<std::size_t>(grid.half());
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (k % h != 0) sum += grid.hermitian_weight(k) * std::norm(s[k]);
  return std::sqrt(sum * grid.volume());
}

inline Field passive_step(const Field& f, double dt, const ModelParams& params, const FlowSpec& flow) {
  const PksState st(0.0, f, Field(f.grid()));
  return step(st, dt, params, flow, System::Passive).n;
}

/// Time series of ‖f_≠(t)‖₂ for ∂_t f + u∂_x f = A^{-1}Δf.
inline std::vector<SeriesPoint> passive_run(const Field& f_in, const ModelParams& params, const FlowSpec& flow,
                                            double T, double sample_every) {
  require(T > 0.0 && sample_every > 0.0, ErrorCode::InvalidArgument, "horizon and interval must be positive");
  const double scale = params.time_scale();
  Integrator integ(f_in.grid(), params, flow, System::Passive);
  SpectralState s = integ.to_spectral_state(PksState(0.0, f_in, Field(f_in.grid())));
  std::vector<SeriesPoint> series{{0.0, remainder_norm(s.n)}};
  const double t_end = T * scale;
  const double tol = 1e-12 * std::max(1.0, t_end);
  long index = 1;
  while (s.t < t_end - tol) {
    const double target = std::min(t_end, index * sample_every * scale);
    const double dt = std::min(integ.stable_dt(s), target - s.t);
    s = integ.step(s, dt);
    if (target - s.t <= tol) {
      s.t = target;
      series.push_back({s.t / scale, remainder_norm(s.n)});
      ++index;
    }
  }
  return series;
}

}  // namespace pks
