#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "pks/spectral.hpp"

namespace pks {

namespace flow {
struct Zero {};
struct StationaryCos {};
struct StationarySin {};
/// cos(y + beta·log(1+t)): critical points drift ever more slowly.
struct TranslatingCos {
  double beta = 1.0;
};
/// cos(y + j·π/2) on the j-th window of length `period`.
struct AlternatingCos {
  double period = 1.0;
};
/// Time-independent profile given by its samples on the y-grid.
struct Custom {
  std::vector<double> samples;
};
}  // namespace flow

using FlowKind = std::variant<flow::Zero, flow::StationaryCos, flow::StationarySin, flow::TranslatingCos,
                              flow::AlternatingCos, flow::Custom>;

/// Shear profile u(t, y); the advecting field is (u, 0, 0) in rescaled form.
struct FlowSpec {
  FlowKind kind = flow::StationaryCos{};
  double amplitude = 1.0;
};

inline bool is_zero_flow(const FlowSpec& spec) {
  return std::holds_alternative<flow::Zero>(spec.kind) || spec.amplitude == 0.0;
}

inline std::string flow_name(const FlowSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, flow::Zero>) return "Zero";
        else if constexpr (std::is_same_v<K, flow::StationaryCos>) return "StationaryCos";
        else if constexpr (std::is_same_v<K, flow::StationarySin>) return "StationarySin";
        else if constexpr (std::is_same_v<K, flow::TranslatingCos>) return "TranslatingCos";
        else if constexpr (std::is_same_v<K, flow::AlternatingCos>) return "AlternatingCos";
        else return "Custom";
      },
      spec.kind);
}

/// Phase shift of the cosine family at time t.
inline double flow_phase(const FlowSpec& spec, double t) {
  return std::visit(
      [t](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, flow::TranslatingCos>) {
          return k.beta * std::log1p(t);
        } else if constexpr (std::is_same_v<K, flow::AlternatingCos>) {
          const double window = std::floor(t / k.period);
          return std::fmod(window, 4.0) * (std::numbers::pi / 2.0);
        } else {
          return 0.0;
        }
      },
      spec.kind);
}

inline std::vector<double> eval_flow(const FlowSpec& spec, double t, std::span<const double> y) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidTime, "flow evaluated at negative time");
  std::vector<double> u(y.size(), 0.0);
  const double a = spec.amplitude;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, flow::Zero>) {
          return;
        } else if constexpr (std::is_same_v<K, flow::StationarySin>) {
          for (std::size_t j = 0; j < y.size(); ++j) u[j] = a * std::sin(y[j]);
        } else if constexpr (std::is_same_v<K, flow::Custom>) {
          require(k.samples.size() == y.size(), ErrorCode::InvalidArgument,
                  "custom flow samples do not match the y-grid");
          for (std::size_t j = 0; j < y.size(); ++j) u[j] = a * k.samples[j];
        } else {
          const double phase = flow_phase(spec, t);
          for (std::size_t j = 0; j < y.size(); ++j) u[j] = a * std::cos(y[j] + phase);
        }
      },
      spec.kind);
  return u;
}

/// sup_t ‖u(t)‖_{W^{m,∞}_y}, reported as the max over derivative orders 0..m.
inline double flow_sobolev_sup(const FlowSpec& spec, int m) {
  require(m >= 0 && m <= 8, ErrorCode::InvalidArgument, "Sobolev order must be in [0, 8]");
  if (const auto* custom = std::get_if<flow::Custom>(&spec.kind)) {
    const int n = static_cast<int>(custom->samples.size());
    const TorusGrid line(1, n);
    RealBuffer buf(custom->samples.begin(), custom->samples.end());
    const Spectrum s = to_spectral(Field(line, std::move(buf)));
    double sup = max_abs(to_physical(s));
    for (int order = 1; order <= m; ++order) sup = std::max(sup, max_abs(to_physical(derivative(s, 0, order))));
    return std::abs(spec.amplitude) * sup;
  }
  if (std::holds_alternative<flow::Zero>(spec.kind)) return 0.0;
  return std::abs(spec.amplitude);
}

}  // namespace pks
