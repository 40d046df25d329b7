#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pks/model.hpp"
#include "pks/spectral.hpp"

namespace pks {

// ---------------------------------------------------------------------------
// x-average / remainder

/// ⟨f⟩(Y) = (1/2π)∫ f(x, Y) dx, on the grid with axis 0 removed.
inline Field x_average(const Field& f) {
  const auto& grid = f.grid();
  require(grid.dim() >= 2, ErrorCode::InvalidArgument, "x-average needs a grid of dimension >= 2");
  const int n = grid.n();
  Field avg(grid.reduced());
  for (std::size_t q = 0; q < avg.size(); ++q) {
    double sum = 0.0;
    const std::size_t base = q * static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) sum += f[base + i];
    avg[q] = sum / n;
  }
  return avg;
}

/// Extends an x-independent field g(Y) to the grid with an x axis prepended.
inline Field broadcast_x(const Field& g) {
  const auto& reduced = g.grid();
  require(reduced.dim() <= 2, ErrorCode::InvalidArgument, "cannot extend a 3D field along x");
  const TorusGrid grid(reduced.dim() + 1, reduced.n());
  const int n = grid.n();
  Field out(grid);
  for (std::size_t q = 0; q < g.size(); ++q)
    for (int i = 0; i < n; ++i) out[q * n + i] = g[q];
  return out;
}

/// f_≠ = f - ⟨f⟩.
inline Field remainder(const Field& f) { return f - broadcast_x(x_average(f)); }

// ---------------------------------------------------------------------------
// F_M

namespace detail {

/// Σ_{|α| <= order} weight(α_x) Π_a |k_a|^{2 α_a}, with odd powers vanishing
/// on Nyquist wavenumbers as in `derivative`.
inline double multi_index_weight(const TorusGrid& grid, const std::array<int, 3>& k, int order, double A,
                                 double x_offset) {
  std::array<std::vector<double>, 3> pw;
  for (int a = 0; a < 3; ++a) {
    pw[a].assign(order + 1, 0.0);
    pw[a][0] = 1.0;
    if (a >= grid.dim()) continue;
    const double k2 = static_cast<double>(k[a]) * k[a];
    for (int i = 1; i <= order; ++i)
      pw[a][i] = (i % 2 == 1 && grid.is_nyquist(k[a])) ? 0.0 : std::pow(k2, i);
  }
  const int jmax = grid.dim() >= 2 ? order : 0;
  const int lmax = grid.dim() >= 3 ? order : 0;
  double total = 0.0;
  for (int i = 0; i <= order; ++i) {
    const double wx = std::pow(A, i + x_offset) * pw[0][i];
    if (wx == 0.0) continue;
    for (int j = 0; j <= std::min(jmax, order - i); ++j)
      for (int l = 0; l <= std::min(lmax, order - i - j); ++l) total += wx * pw[1][j] * pw[2][l];
  }
  return total;
}

inline void require_remainder(const Field& f, const char* name) {
  const Field avg = x_average(f);
  const double tol = 1e-12 * std::max(1.0, max_abs(f));
  require(max_abs(avg) <= tol, ErrorCode::NotARemainder, std::string(name) + " has a nonzero x-average");
}

}  // namespace detail

/// F_M = Σ_{|α|<=M} A^{α_x+1/2} ‖∂^α n_≠‖₂² + Σ_{|α|<=M+1} A^{α_x} ‖∂^α C_≠‖₂²,
/// evaluated exactly from Fourier coefficients.
inline double functional_F_M(const Field& n_neq, const Field& C_neq, double A, int M) {
  require(M >= 3, ErrorCode::InvalidArgument, "F_M needs M >= 3");
  require(n_neq.grid() == C_neq.grid(), ErrorCode::InvalidArgument, "F_M inputs live on different grids");
  detail::require_remainder(n_neq, "n");
  detail::require_remainder(C_neq, "C");
  const auto& grid = n_neq.grid();
  const Spectrum n_hat = to_spectral(n_neq);
  const Spectrum c_hat = to_spectral(C_neq);
  double total = 0.0;
  for (std::size_t s = 0; s < n_hat.size(); ++s) {
    const double an = std::norm(n_hat[s]);
    const double ac = std::norm(c_hat[s]);
    if (an == 0.0 && ac == 0.0) continue;
    const auto k = grid.wavevector(s);
    const double w = grid.hermitian_weight(s);
    if (an != 0.0) total += w * an * detail::multi_index_weight(grid, k, M, A, 0.5);
    if (ac != 0.0) total += w * ac * detail::multi_index_weight(grid, k, M + 1, A, 0.0);
  }
  return total * grid.volume();
}

// ---------------------------------------------------------------------------
// Free energy

struct FreeEnergy {
  double E = 0.0;
  double S = 0.0;
  double P = 0.0;
  bool negative_density = false;  // n dipped below -tol_neg somewhere
};

/// ½∫|∇e|² - ∫e(f - mean f).
inline double chemical_potential(const Field& f, const Field& e) {
  require(f.grid() == e.grid(), ErrorCode::InvalidArgument, "fields live on different grids");
  const auto& grid = e.grid();
  const Spectrum e_hat = to_spectral(e);
  double grad2 = 0.0;
  for (std::size_t s = 0; s < e_hat.size(); ++s)
    grad2 += grid.hermitian_weight(s) * wavenumber_squared(grid.wavevector(s)) * std::norm(e_hat[s]);
  grad2 *= grid.volume();
  const double fbar = mean(f);
  double coupling = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) coupling += e[p] * (f[p] - fbar);
  coupling *= grid.cell_volume();
  return 0.5 * grad2 - coupling;
}

/// ∫ n log n with 0·log 0 = 0; values in [-tol_neg, 0) count as 0.
inline std::pair<double, bool> entropy(const Field& n) {
  const double tol_neg = 1e-10 * max_abs(n);
  bool negative = false;
  double sum = 0.0;
  for (double v : n.values()) {
    if (v < -tol_neg) negative = true;
    if (v > 0.0) sum += v * std::log(v);
  }
  return {sum * n.grid().cell_volume(), negative};
}

inline FreeEnergy free_energy(const Field& n, const Field& C) {
  FreeEnergy out;
  std::tie(out.S, out.negative_density) = entropy(n);
  out.P = chemical_potential(n, C);
  out.E = out.S + out.P;
  return out;
}

// ---------------------------------------------------------------------------
// Decay fits

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct SeriesPoint {
  double t;
  double value;
};

namespace detail {

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xm, dy = y[i] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorCode::InsufficientData, "abscissae are all equal");
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
  }
  // a flat series (up to rounding of the mean) is fitted perfectly
  const bool flat = syy <= 1e-26 * n * std::max(1.0, ym * ym);
  const double r2 = flat ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return {slope, intercept, r2};
}

}  // namespace detail

inline constexpr std::pair<double, double> kDefaultFitWindow{0.2, 0.9};
inline constexpr std::size_t kMinFitSamples = 10;

/// Least-squares line through (t, log value) on the samples whose index lies
/// in [lo·n, hi·n); rate = -slope.
inline DecayFit fit_decay(const std::vector<SeriesPoint>& series,
                          std::pair<double, double> window = kDefaultFitWindow) {
  const auto [lo, hi] = window;
  require(0.0 <= lo && lo < hi && hi <= 1.0, ErrorCode::InvalidArgument, "fit window must satisfy 0 <= lo < hi <= 1");
  const double n = static_cast<double>(series.size());
  const auto first = static_cast<std::size_t>(std::floor(lo * n));
  const auto last = std::min(series.size(), static_cast<std::size_t>(std::ceil(hi * n)));
  require(last > first && last - first >= kMinFitSamples, ErrorCode::InsufficientData,
          "fewer than 10 samples in the fit window");
  std::vector<double> t, logv;
  for (std::size_t i = first; i < last; ++i) {
    require(series[i].value > 0.0 && std::isfinite(series[i].value), ErrorCode::CannotFitLog,
            "series has nonpositive or non-finite values");
    t.push_back(series[i].t);
    logv.push_back(std::log(series[i].value));
  }
  const auto line = detail::least_squares(t, logv);
  return {-line.slope, line.intercept, line.r_squared, t.front(), t.back()};
}

struct ScalingFit {
  double alpha = 0.0;  // rate ∝ A^{-alpha}
  double r_squared = 0.0;
};

struct RatePoint {
  double A;
  double rate;
};

/// Minimum spread of A values, in decades, for an exponent fit.
inline constexpr double kMinScalingDecades = 1.5;

inline ScalingFit scaling_exponent(const std::vector<RatePoint>& fits) {
  std::vector<double> logA, logr;
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  for (const auto& f : fits) {
    require(f.A > 0.0 && f.rate > 0.0 && std::isfinite(f.rate), ErrorCode::CannotFitLog,
            "scaling fit needs positive A and rates");
    logA.push_back(std::log(f.A));
    logr.push_back(std::log(f.rate));
    amin = std::min(amin, f.A);
    amax = std::max(amax, f.A);
  }
  std::vector<double> distinct = logA;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  require(distinct.size() >= 4, ErrorCode::InsufficientData, "scaling fit needs >= 4 distinct A values");
  require(std::log10(amax / amin) >= kMinScalingDecades, ErrorCode::InsufficientData,
          "A values span too few decades");
  const auto line = detail::least_squares(logA, logr);
  return {-line.slope, line.r_squared};
}

struct EnvelopeCheck {
  double delta_fit = 0.0;
  double c_fit = 0.0;
  bool holds = false;
};

/// Envelope constant of the hypothesis F_M(t) <= c F_M(0) exp(-2δt/A^{1/3}).
inline const double kEnvelopeConstant = 4.0 * std::exp(2.0);

/// Fits the decay of an F_M series and tests it against the envelope with
/// c = 4e². `c_fit` is the smallest c for which the fitted envelope covers
/// every sample.
inline EnvelopeCheck check_envelope(const std::vector<SeriesPoint>& series, double A,
                                    std::pair<double, double> window = kDefaultFitWindow) {
  require(!series.empty() && series.front().value > 0.0, ErrorCode::InvalidArgument, "F_M(0) must be positive");
  const DecayFit fit = fit_decay(series, window);
  const double span = fit.t_hi - fit.t_lo;
  const double rate = std::abs(fit.rate * span) <= 1e-9 ? 0.0 : fit.rate;
  EnvelopeCheck out;
  out.delta_fit = std::cbrt(A) * rate / 2.0;
  const double f0 = series.front().value;
  const double t0 = series.front().t;
  for (const auto& p : series) out.c_fit = std::max(out.c_fit, p.value / (f0 * std::exp(-rate * (p.t - t0))));
  out.holds = out.delta_fit > 0.0 && out.c_fit <= kEnvelopeConstant;
  return out;
}

// ---------------------------------------------------------------------------
// Blow-up detection

struct BlowUpSignal {
  double t = 0.0;
  double sup_n = 0.0;
  std::string reason;
};

inline constexpr double kDefaultBlowupFactor = 1e3;

inline std::optional<BlowUpSignal> blowup_check(const PksState& state, double init_sup,
                                                double factor = kDefaultBlowupFactor) {
  require(init_sup > 0.0, ErrorCode::InvalidArgument, "initial sup must be positive");
  if (!state.n.all_finite() || !state.C.all_finite())
    return BlowUpSignal{state.t, std::numeric_limits<double>::infinity(), "non-finite values"};
  const double sup = max_abs(state.n);
  if (sup > factor * init_sup) return BlowUpSignal{state.t, sup, "sup-norm threshold"};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Per-sample functionals

struct FunctionalValues {
  double t = 0.0;
  double mass = 0.0;
  double mean_C = 0.0;
  double min_n = 0.0;
  double max_n = 0.0;
  double l2_n_neq = 0.0;
  double l2_gradC_neq = 0.0;
  double F_M = 0.0;
  double E = 0.0;
  double S = 0.0;
  double P = 0.0;
  double dt_used = 0.0;
  bool positivity_flag = false;
};

/// Positivity warning threshold relative to ‖n_in‖_∞.
inline constexpr double kPositivityTolerance = 0.01;

/// All monitored functionals of one state. `t_report` is the time in the
/// caller's units. For Full states E, S, P refer to the x-averages.
inline FunctionalValues measure(const PksState& state, System system, const ModelParams& params,
                                double t_report, double dt_used, double init_sup) {
  FunctionalValues v;
  const auto& grid = state.grid();
  v.t = t_report;
  v.dt_used = dt_used;
  v.mass = integral(state.n);
  v.mean_C = mean(state.C);
  v.min_n = min_value(state.n);
  v.max_n = max_value(state.n);
  v.positivity_flag = v.min_n < -kPositivityTolerance * init_sup;

  if (system == System::Averaged || grid.dim() < 2) {
    const FreeEnergy fe = free_energy(state.n, state.C);
    v.E = fe.E;
    v.S = fe.S;
    v.P = fe.P;
    return v;
  }

  const Field n_neq = remainder(state.n);
  const Field c_neq = remainder(state.C);
  v.l2_n_neq = l2_norm(n_neq);
  v.l2_gradC_neq = l2_norm(magnitude(gradient(c_neq)));
  v.F_M = functional_F_M(n_neq, c_neq, params.A, params.M);
  const FreeEnergy fe = free_energy(x_average(state.n), x_average(state.C));
  v.E = fe.E;
  v.S = fe.S;
  v.P = fe.P;
  return v;
}

}  // namespace pks
