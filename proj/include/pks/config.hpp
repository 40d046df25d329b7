#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "pks/flows.hpp"
#include "pks/format.hpp"
#include "pks/model.hpp"

namespace pks {

enum class Preset { Uniform, GaussianBump, UniformPlusXPerturb };

inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::Uniform: return "Uniform";
    case Preset::GaussianBump: return "GaussianBump";
    case Preset::UniformPlusXPerturb: return "UniformPlusXPerturb";
  }
  return "?";
}

struct ExperimentConfig {
  struct Grid {
    int dim = 2;
    int n_points = 64;
    bool operator==(const Grid&) const = default;
  } grid;
  struct Model {
    double A = 1024.0;
    int M = 3;
    Form form = Form::Rescaled;
    double cfl = 0.1;
    double dt_min = 1e-10;
    double dt_max = 0.1;
    bool dealias = true;
    bool operator==(const Model&) const = default;
  } model;
  struct Flow {
    std::string kind = "StationaryCos";
    double amplitude = 1.0;
    double beta = 1.0;
    double period = 1.0;
    bool operator==(const Flow&) const = default;
  } flow;
  struct Init {
    Preset preset = Preset::GaussianBump;
    double mass = 0.5;  // units of 8π per unit x-length
    double bump_width = 0.5;
    double perturb_eps = 0.1;
    std::uint64_t seed = 1;
    bool operator==(const Init&) const = default;
  } init;
  struct Time {
    double horizon = 10.0;
    double sample_every = 0.1;
    std::optional<double> theta;
    bool operator==(const Time&) const = default;
  } time;
  struct Output {
    std::string dir = "out";
    double snapshots_every = 0.0;
    bool csv = true;
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const ExperimentConfig&) const = default;

  ModelParams model_params() const {
    ModelParams p;
    p.A = model.A;
    p.M = model.M;
    p.form = model.form;
    p.cfl = model.cfl;
    p.dt_min = model.dt_min;
    p.dt_max = model.dt_max;
    p.dealias = model.dealias;
    return p;
  }

  FlowSpec flow_spec() const {
    FlowSpec spec;
    spec.amplitude = flow.amplitude;
    if (flow.kind == "Zero") spec.kind = flow::Zero{};
    else if (flow.kind == "StationaryCos") spec.kind = flow::StationaryCos{};
    else if (flow.kind == "StationarySin") spec.kind = flow::StationarySin{};
    else if (flow.kind == "TranslatingCos") spec.kind = flow::TranslatingCos{flow.beta};
    else if (flow.kind == "AlternatingCos") spec.kind = flow::AlternatingCos{flow.period};
    else throw Error(ErrorCode::ConfigError, "unknown flow kind '" + flow.kind + "'");
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Formatting

inline std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&os](std::string_view key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  os << "[grid]\n";
  kv("dim", std::to_string(c.grid.dim));
  kv("n_points", std::to_string(c.grid.n_points));
  os << "\n[model]\n";
  kv("A", format_double(c.model.A));
  kv("M", std::to_string(c.model.M));
  kv("form", to_string(c.model.form));
  kv("cfl", format_double(c.model.cfl));
  kv("dt_min", format_double(c.model.dt_min));
  kv("dt_max", format_double(c.model.dt_max));
  kv("dealias", b(c.model.dealias));
  os << "\n[flow]\n";
  kv("kind", c.flow.kind);
  kv("amplitude", format_double(c.flow.amplitude));
  kv("beta", format_double(c.flow.beta));
  kv("period", format_double(c.flow.period));
  os << "\n[init]\n";
  kv("preset", to_string(c.init.preset));
  kv("mass", format_double(c.init.mass));
  kv("bump_width", format_double(c.init.bump_width));
  kv("perturb_eps", format_double(c.init.perturb_eps));
  kv("seed", std::to_string(c.init.seed));
  os << "\n[time]\n";
  kv("horizon", format_double(c.time.horizon));
  kv("sample_every", format_double(c.time.sample_every));
  if (c.time.theta) kv("theta", format_double(*c.time.theta));
  os << "\n[output]\n";
  kv("dir", c.output.dir);
  kv("snapshots_every", format_double(c.output.snapshots_every));
  kv("csv", b(c.output.csv));
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class ConfigReader {
 public:
  explicit ConfigReader(int line) : line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_) + ": " + what);
  }

  double real(std::string_view key, std::string_view v) const {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
      fail("key '" + std::string(key) + "' expects a real number, got '" + std::string(v) + "'");
    return out;
  }

  template <class Int>
  Int integer(std::string_view key, std::string_view v) const {
    Int out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      fail("key '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
    return out;
  }

  bool boolean(std::string_view key, std::string_view v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("key '" + std::string(key) + "' expects true or false, got '" + std::string(v) + "'");
  }

  void check(bool ok, const std::string& what) const {
    if (!ok) fail(what);
  }

 private:
  int line_;
};

inline void assign(ExperimentConfig& c, const std::string& key, std::string_view v, const ConfigReader& r) {
  if (key == "grid.dim") {
    c.grid.dim = r.integer<int>(key, v);
    r.check(c.grid.dim == 2 || c.grid.dim == 3, "grid.dim must be 2 or 3");
  } else if (key == "grid.n_points") {
    c.grid.n_points = r.integer<int>(key, v);
    r.check(c.grid.n_points >= 8 && c.grid.n_points % 2 == 0, "grid.n_points must be even and >= 8");
  } else if (key == "model.A") {
    c.model.A = r.real(key, v);
    r.check(c.model.A >= 1.0, "model.A must be >= 1");
  } else if (key == "model.M") {
    c.model.M = r.integer<int>(key, v);
    r.check(c.model.M >= 3, "model.M must be >= 3");
  } else if (key == "model.form") {
    if (v == "Rescaled") c.model.form = Form::Rescaled;
    else if (v == "Unscaled") c.model.form = Form::Unscaled;
    else r.fail("model.form must be Rescaled or Unscaled");
  } else if (key == "model.cfl") {
    c.model.cfl = r.real(key, v);
    r.check(c.model.cfl > 0.0 && c.model.cfl <= 1.0, "model.cfl must lie in (0, 1]");
  } else if (key == "model.dt_min") {
    c.model.dt_min = r.real(key, v);
    r.check(c.model.dt_min > 0.0, "model.dt_min must be > 0");
  } else if (key == "model.dt_max") {
    c.model.dt_max = r.real(key, v);
    r.check(c.model.dt_max > 0.0, "model.dt_max must be > 0");
  } else if (key == "model.dealias") {
    c.model.dealias = r.boolean(key, v);
  } else if (key == "flow.kind") {
    c.flow.kind = std::string(v);
    r.check(v == "Zero" || v == "StationaryCos" || v == "StationarySin" || v == "TranslatingCos" ||
                v == "AlternatingCos",
            "unknown flow.kind '" + std::string(v) + "'");
  } else if (key == "flow.amplitude") {
    c.flow.amplitude = r.real(key, v);
    r.check(c.flow.amplitude >= 0.0, "flow.amplitude must be >= 0");
  } else if (key == "flow.beta") {
    c.flow.beta = r.real(key, v);
  } else if (key == "flow.period") {
    c.flow.period = r.real(key, v);
    r.check(c.flow.period > 0.0, "flow.period must be > 0");
  } else if (key == "init.preset") {
    if (v == "Uniform") c.init.preset = Preset::Uniform;
    else if (v == "GaussianBump") c.init.preset = Preset::GaussianBump;
    else if (v == "UniformPlusXPerturb") c.init.preset = Preset::UniformPlusXPerturb;
    else r.fail("unknown init.preset '" + std::string(v) + "'");
  } else if (key == "init.mass") {
    c.init.mass = r.real(key, v);
    r.check(c.init.mass > 0.0, "init.mass must be > 0");
  } else if (key == "init.bump_width") {
    c.init.bump_width = r.real(key, v);
    r.check(c.init.bump_width > 0.0, "init.bump_width must be > 0");
  } else if (key == "init.perturb_eps") {
    c.init.perturb_eps = r.real(key, v);
    r.check(c.init.perturb_eps >= 0.0 && c.init.perturb_eps < 1.0, "init.perturb_eps must lie in [0, 1)");
  } else if (key == "init.seed") {
    c.init.seed = r.integer<std::uint64_t>(key, v);
  } else if (key == "time.horizon") {
    c.time.horizon = r.real(key, v);
    r.check(c.time.horizon > 0.0, "time.horizon must be > 0");
  } else if (key == "time.sample_every") {
    c.time.sample_every = r.real(key, v);
    r.check(c.time.sample_every > 0.0, "time.sample_every must be > 0");
  } else if (key == "time.theta") {
    c.time.theta = r.real(key, v);
    r.check(*c.time.theta >= 0.0, "time.theta must be >= 0");
  } else if (key == "output.dir") {
    r.check(!v.empty(), "output.dir must not be empty");
    c.output.dir = std::string(v);
  } else if (key == "output.snapshots_every") {
    c.output.snapshots_every = r.real(key, v);
    r.check(c.output.snapshots_every >= 0.0, "output.snapshots_every must be >= 0");
  } else if (key == "output.csv") {
    c.output.csv = r.boolean(key, v);
  } else {
    r.fail("unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Parses `[section]` headers, `key = value` lines and `#` comments. Keys may
/// also be written fully qualified (`model.A = 4096`) outside a section.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    const detail::ConfigReader reader(line_no);
    if (!line.empty()) {
      if (line.front() == '[') {
        reader.check(line.back() == ']', "malformed section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        reader.check(section == "grid" || section == "model" || section == "flow" || section == "init" ||
                         section == "time" || section == "output",
                     "unknown section '" + section + "'");
      } else {
        const auto eq = line.find('=');
        reader.check(eq != std::string_view::npos, "expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto value = detail::trim(line.substr(eq + 1));
        reader.check(!key.empty(), "missing key");
        const std::string full = key.find('.') != std::string::npos || section.empty() ? key : section + "." + key;
        detail::assign(c, full, value, reader);
      }
    }
    if (end == text.size()) break;
  }
  if (c.model.dt_max < c.model.dt_min)
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": model.dt_max must be >= model.dt_min");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace pks
