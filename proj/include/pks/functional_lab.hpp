#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pks/diagnostics.hpp"
#include "pks/format.hpp"
#include "pks/model.hpp"
#include "pks/random_fields.hpp"
#include "pks/spectral.hpp"

namespace pks::lab {

// ---------------------------------------------------------------------------
// Chemical potential minimization

struct PotentialGap {
  double gap_direct = 0.0;    // P[f;e] - P[f;e_f]
  double gap_identity = 0.0;  // ½∫|∇(e - e_f)|²
};

inline double dirichlet_energy(const Spectrum& s) {
  const auto& grid = s.grid();
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    sum += grid.hermitian_weight(k) * wavenumber_squared(grid.wavevector(k)) * std::norm(s[k]);
  return 0.5 * sum * grid.volume();
}

inline PotentialGap potential_gap(const Field& f, const Field& e) {
  require(f.grid() == e.grid(), ErrorCode::InvalidArgument, "fields live on different grids");
  const Field e_f = solve_poisson(f);
  PotentialGap out;
  out.gap_direct = chemical_potential(f, e) - chemical_potential(f, e_f);
  out.gap_identity = dirichlet_energy(to_spectral(e - e_f));
  return out;
}

/// I(f) = ∫(f - f̄) e_f, the Green's-function interaction energy.
inline double interaction_energy(const Field& f) {
  const Field e_f = solve_poisson(f);
  const double fbar = mean(f);
  double sum = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) sum += (f[p] - fbar) * e_f[p];
  return sum * f.grid().cell_volume();
}

// ---------------------------------------------------------------------------
// Logarithmic HLS

struct LogHlsMargin {
  double lhs = 0.0;       // I(f)
  double rhs_core = 0.0;  // (‖f‖₁/4π) ∫ f log f
  double margin = 0.0;    // rhs_core + C0 - lhs
};

inline LogHlsMargin log_hls_margin(const Field& f, double C0) {
  const auto [S, negative] = entropy(f);
  require(!negative, ErrorCode::NegativeDensity, "density is negative beyond tolerance");
  double l1 = 0.0;
  for (double v : f.values()) l1 += std::max(v, 0.0);
  l1 *= f.grid().cell_volume();
  LogHlsMargin out;
  out.lhs = interaction_energy(f);
  out.rhs_core = l1 / (4.0 * std::numbers::pi) * S;
  out.margin = out.rhs_core + C0 - out.lhs;
  return out;
}

/// Random positive density of total mass `mass`: either exp of a random
/// smooth field or a randomly placed periodized Gaussian.
inline Field random_density(const TorusGrid& grid, std::mt19937_64& rng, double mass) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Field f(grid);
  if (uni(rng) < 0.5) {
    Field g = random_smooth_field(grid, rng, 4);
    const double amp = 4.0 * uni(rng) / std::max(max_abs(g), 1e-300);
    for (std::size_t p = 0; p < f.size(); ++p) f[p] = std::exp(amp * g[p]);
  } else {
    const double min_w = 3.0 * grid.spacing();
    const double width = min_w + (1.0 - min_w) * uni(rng);
    std::array<double, 3> c{kTwoPi * uni(rng), kTwoPi * uni(rng), kTwoPi * uni(rng)};
    for (std::size_t p = 0; p < f.size(); ++p) {
      const auto idx = grid.indices(p);
      double v = 1.0;
      for (int a = 0; a < grid.dim(); ++a) {
        double s = 0.0;
        for (int image = -3; image <= 3; ++image) {
          const double d = grid.coordinate(idx[a]) - c[a] + image * kTwoPi;
          s += std::exp(-d * d / (2.0 * width * width));
        }
        v *= s;
      }
      f[p] = v + 1e-12;
    }
  }
  f *= mass / integral(f);
  return f;
}

struct HlsCalibration {
  double min_core_gap = 0.0;  // min over the suite of rhs_core - lhs
  double C0 = 0.0;            // calibrated constant
};

/// Calibrates the unconstructed log-HLS constant: C0 = -min + 10% of |min|.
inline HlsCalibration calibrate_log_hls(const TorusGrid& grid, std::size_t samples, double mass, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const auto m = log_hls_margin(random_density(grid, rng, mass), 0.0);
    worst = std::min(worst, m.rhs_core - m.lhs);
  }
  return {worst, -worst + 0.1 * std::abs(worst)};
}

// ---------------------------------------------------------------------------
// Heat semigroup bounds

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double inverse_exponent(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// ‖(∇) e^{tΔ/A} h‖_p / [(t/A)^{-γ-d/2(1/q-1/p)} e^{-t/(cA)} ‖h‖_q] with
/// γ = 0, c = 2 (plain) or γ = ½, c = 3 (gradient).
inline double heat_bound_ratio(const Field& h, double A, double t, double p, double q, bool with_gradient) {
  const auto& grid = h.grid();
  require(grid.dim() <= 2, ErrorCode::InvalidArgument, "semigroup bounds are stated on T^1 and T^2");
  require(q >= 1.0 && p >= q, ErrorCode::InvalidArgument, "need 1 <= q <= p <= inf");
  require(t > 0.0 && A > 0.0, ErrorCode::InvalidArgument, "need t > 0 and A > 0");
  require(std::abs(mean(h)) <= 1e-12 * std::max(1.0, max_abs(h)), ErrorCode::NotMeanZero, "input is not mean-zero");
  const Spectrum evolved = heat_propagate(to_spectral(h), t, A);
  const double numerator = with_gradient ? lp_norm(magnitude(gradient(evolved)), p) : lp_norm(to_physical(evolved), p);
  const double gamma = with_gradient ? 0.5 : 0.0;
  const double c = with_gradient ? 3.0 : 2.0;
  const double d = grid.dim();
  const double s = t / A;
  const double exponent = -gamma - 0.5 * d * (inverse_exponent(q) - inverse_exponent(p));
  const double denominator = std::pow(s, exponent) * std::exp(-s / c) * lp_norm(h, q);
  return numerator / denominator;
}

struct HeatSuiteCase {
  int dim;
  double p;
  double q;
  bool with_gradient;
};

/// Exponent pairs of the sampled suite.
inline const std::vector<std::pair<double, double>> kHeatSuitePairs{{2.0, 1.0}, {kInf, 2.0}, {4.0, 2.0}};

/// Random mean-zero input: smooth modes, grid noise, or a narrow spike.
inline Field random_mean_zero(const TorusGrid& grid, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> family(0, 2);
  switch (family(rng)) {
    case 0: return mean_free(random_smooth_field(grid, rng, 6));
    case 1: return mean_free(random_noise_field(grid, rng));
    default: {
      Field f(grid);
      std::uniform_int_distribution<std::size_t> where(0, grid.size() - 1);
      f[where(rng)] = 1.0;
      return mean_free(std::move(f));
    }
  }
}

/// Maximum ratio over `samples` random draws for one case, t/A log-uniform in
/// [1e-3, 10].
inline double calibrate_heat_ratio(const HeatSuiteCase& c, int n_points, std::size_t samples, std::uint64_t seed) {
  const TorusGrid grid(c.dim, n_points);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_s(std::log(1e-3), std::log(10.0));
  const double A = 64.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Field h = random_mean_zero(grid, rng);
    const double t = A * std::exp(log_s(rng));
    worst = std::max(worst, heat_bound_ratio(h, A, t, c.p, c.q, c.with_gradient));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Chemical-gradient bound along a run

/// Pointwise Frobenius norm of the tensor of all order-m partial derivatives,
/// ordered index tuples counted with multiplicity; m = 0 gives |f|.
inline Field derivative_tensor_magnitude(const Field& f, int m) {
  const auto& grid = f.grid();
  if (m == 0) {
    Field out = f;
    for (auto& v : out.values()) v = std::abs(v);
    return out;
  }
  const Spectrum s = to_spectral(f);
  Field acc(grid);
  const int d = grid.dim();
  auto factorial = [](int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= (d >= 2 ? m - i : 0); ++j) {
      const int l = m - i - j;
      if ((d < 3 && l != 0) || l < 0) continue;
      const double mult = factorial(m) / (factorial(i) * factorial(j) * factorial(l));
      Spectrum dsp = s;
      if (i > 0) dsp = derivative(dsp, 0, i);
      if (j > 0) dsp = derivative(dsp, 1, j);
      if (l > 0) dsp = derivative(dsp, 2, l);
      const Field df = to_physical(dsp);
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += mult * df[p] * df[p];
    }
  for (auto& v : acc.values()) v = std::sqrt(v);
  return acc;
}

struct BoundSample {
  double t = 0.0;  // rescaled time
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Bound on ∫_0^τ s^{-a} e^{-s/3} ds by K·min{1, τ^{1-a}}, a < 1.
inline double duhamel_prefactor(double a) {
  return std::max(std::pow(3.0, 1.0 - a) * std::tgamma(1.0 - a), 1.0 / (1.0 - a));
}

/// Compares ‖∇^{m+1}C(t)‖_p along a run against
/// K·C·min{1,(t/A)^{1/2-d/2(1/q-1/p)}}·sup_{τ<=t}‖∇^m(n(τ)-n̄)‖_q + ‖∇^{m+1}C_in‖_p,
/// where C is the calibrated gradient-semigroup constant.
inline std::vector<BoundSample> gradient_bound_series(const std::vector<PksState>& samples, const Field& C_in,
                                                      double A, double p, double q, int m, double heat_constant) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "empty sample series");
  const double d = C_in.grid().dim();
  require(inverse_exponent(q) < 1.0 / d + inverse_exponent(p), ErrorCode::ExponentCondition,
          "exponents violate 1/q < 1/d + 1/p");
  const double a = 0.5 + 0.5 * d * (inverse_exponent(q) - inverse_exponent(p));
  const double K = duhamel_prefactor(a);
  const double initial = lp_norm(derivative_tensor_magnitude(C_in, m + 1), p);
  std::vector<BoundSample> out;
  double sup_source = 0.0;
  for (const auto& st : samples) {
    Field centered = st.n;
    centered += -mean(st.n);
    sup_source = std::max(sup_source, lp_norm(derivative_tensor_magnitude(centered, m), q));
    const double lhs = lp_norm(derivative_tensor_magnitude(st.C, m + 1), p);
    const double growth = std::min(1.0, std::pow(st.t / A, 1.0 - a));
    out.push_back({st.t, lhs, K * heat_constant * growth * sup_source + initial});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification report

struct CheckRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

/// Fixed-seed verification suite over the identities and calibrated bounds.
inline std::vector<CheckRow> verification_suite(std::uint64_t seed = 20240601) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  const TorusGrid plane(2, 32);

  {  // Chemical potential minimization identity
    double worst = 0.0, min_gap = kInf;
    for (int i = 0; i < 200; ++i) {
      const Field f = random_smooth_field(plane, rng, 8);
      const Field e = random_smooth_field(plane, rng, 8);
      const auto g = potential_gap(f, e);
      const double allowed = 1e-9 * std::abs(g.gap_identity) + 1e-12;
      worst = std::max(worst, std::abs(g.gap_direct - g.gap_identity) / allowed);
      min_gap = std::min({min_gap, g.gap_direct, g.gap_identity});
    }
    rows.push_back({"potential_gap_identity", worst, 1.0, worst, worst <= 1.0});
    rows.push_back({"potential_gap_nonnegative", min_gap, -1e-12, 0.0, min_gap >= -1e-12});
  }
  {  // Poisson residual
    const Field f = random_smooth_field(plane, rng, 10);
    const Field e = solve_poisson(f);
    Field residual = f;
    residual += -mean(f);
    for (int a = 0; a < 2; ++a) residual += derivative(e, a, 2);
    const double r = max_abs(residual), bound = 1e-10 * max_abs(f);
    rows.push_back({"poisson_residual", r, bound, r / bound, r <= bound});
  }
  {  // Semigroup composition
    const Field f = random_smooth_field(plane, rng, 10);
    const Field two = heat_propagate(heat_propagate(f, 0.3, 2.0), 0.5, 2.0);
    const Field one = heat_propagate(f, 0.8, 2.0);
    const double err = max_abs(two - one) / max_abs(f);
    rows.push_back({"heat_semigroup_composition", err, 1e-12, err / 1e-12, err <= 1e-12});
  }
  {  // log-HLS: calibrate then test on a fresh suite
    const double mass = 4.0 * std::numbers::pi;
    const auto cal = calibrate_log_hls(plane, 500, mass, seed + 1);
    std::mt19937_64 fresh(seed + 2);
    double min_margin = kInf;
    for (int i = 0; i < 500; ++i)
      min_margin = std::min(min_margin, log_hls_margin(random_density(plane, fresh, mass), cal.C0).margin);
    rows.push_back({"log_hls_calibrated_C0", cal.C0, -cal.min_core_gap, 0.0, true});
    rows.push_back({"log_hls_fresh_suite", -min_margin, 0.0, 0.0, min_margin >= 0.0});
  }
  {  // Heat semigroup bounds
    for (int dim : {1, 2})
      for (bool grad : {false, true})
        for (const auto& [p, q] : kHeatSuitePairs) {
          const double worst = calibrate_heat_ratio({dim, p, q, grad}, dim == 1 ? 128 : 32, 60, seed + 10 + dim);
          const std::string name = std::string("heat_ratio_") + (grad ? "grad_" : "plain_") + "d" +
                                   std::to_string(dim) + "_p" + (std::isinf(p) ? std::string("inf") : format_double(p)) +
                                   "_q" + format_double(q);
          rows.push_back({name, worst, 10.0, worst / 10.0, worst <= 10.0});
        }
  }
  return rows;
}

}  // namespace pks::lab
