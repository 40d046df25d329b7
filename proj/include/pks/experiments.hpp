#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pks/config.hpp"
#include "pks/diagnostics.hpp"
#include "pks/functional_lab.hpp"
#include "pks/init.hpp"
#include "pks/io.hpp"
#include "pks/solver.hpp"

namespace pks::experiments {

namespace fs = std::filesystem;

/// Exit codes: the blow-up outcome is distinct from failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBlowUp = 2;

inline fs::path output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("PKS_OUTPUT_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(cfg.output.dir);
}

/// Model parameters and flow for one member of an A-study. A = 0 denotes
/// the flow-free control: no flow, unit time scale.
struct MemberSetup {
  ModelParams params;
  FlowSpec flow;
};

inline MemberSetup member_setup(const ExperimentConfig& cfg, double A) {
  MemberSetup m{cfg.model_params(), cfg.flow_spec()};
  if (A == 0.0) {
    m.params.A = 1.0;
    m.flow = FlowSpec{flow::Zero{}, 0.0};
  } else {
    require(A >= 1.0, ErrorCode::ConfigError, "A values must be 0 (no flow) or >= 1");
    m.params.A = A;
  }
  return m;
}

struct MemberReport {
  double A = 0.0;
  double t_final = 0.0;  // caller units
  RunOutcome outcome;
  double delta_fit = std::numeric_limits<double>::quiet_NaN();
  std::optional<FunctionalValues> theta_sample;
};

inline std::string outcome_line(const MemberReport& r) {
  std::ostringstream os;
  if (r.outcome.blew_up())
    os << "outcome=BlowUp t_detect=" << format_double(r.outcome.t_detect) << " reason=\"" << r.outcome.reason << '"';
  else
    os << "outcome=Completed t=" << format_double(r.t_final);
  os << " sup_n=" << format_double(r.outcome.sup_n);
  if (!std::isnan(r.delta_fit)) os << " delta_fit=" << format_double(r.delta_fit);
  if (r.theta_sample) os << " theta_t=" << format_double(r.theta_sample->t) << " theta_F_M=" << format_double(r.theta_sample->F_M);
  return os.str();
}

/// F_M envelope fit of a run, when the remainder is nontrivial.
inline double envelope_delta(const RunOutcome& outcome, double A) {
  std::vector<SeriesPoint> series;
  for (const auto& v : outcome.samples) series.push_back({v.t, v.F_M});
  if (series.size() < 2 * kMinFitSamples || !(series.front().value > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  try {
    return check_envelope(series, A).delta_fit;
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// One simulation with artifacts in `dir`: diagnostics.csv, snapshots/,
/// outcome.txt.
inline MemberReport run_member(const ExperimentConfig& cfg, double A, const fs::path& dir) {
  fs::create_directories(dir);
  const MemberSetup setup = member_setup(cfg, A);
  const PksState init = make_initial(cfg, setup.params.A);

  RunSinks sinks;
  std::optional<CsvSink> csv;
  if (cfg.output.csv) {
    csv.emplace(dir / "diagnostics.csv");
    sinks.on_sample = [&csv](const FunctionalValues& v) { (*csv)(v); };
  }
  long snap_counter = 0;
  if (cfg.output.snapshots_every > 0.0) {
    fs::create_directories(dir / "snapshots");
    sinks.snapshot_every = cfg.output.snapshots_every;
    sinks.on_snapshot = [&](const PksState& st) {
      char name[32];
      std::snprintf(name, sizeof(name), "snap_%05ld.pks", snap_counter++);
      write_snapshot(dir / "snapshots" / name, Snapshot{st.t / setup.params.time_scale(), setup.params.A, st.n, st.C});
    };
  }
  RunOptions options;
  double theta_time = -1.0;
  if (cfg.time.theta) {
    theta_time = std::pow(setup.params.A, 1.0 / 3.0 + *cfg.time.theta) / setup.params.time_scale();
    options.extra_sample_times.push_back(theta_time);
  }

  MemberReport report{A, 0.0,
                      run(init, setup.params, setup.flow, cfg.time.horizon, cfg.time.sample_every, sinks, options),
                      std::numeric_limits<double>::quiet_NaN(), std::nullopt};
  report.t_final = report.outcome.final_state.t / setup.params.time_scale();
  report.delta_fit = envelope_delta(report.outcome, setup.params.A);
  if (theta_time > 0.0)
    for (const auto& v : report.outcome.samples)
      if (std::abs(v.t - theta_time) <= 1e-9 * std::max(1.0, theta_time)) report.theta_sample = v;

  std::ofstream(dir / "outcome.txt") << outcome_line(report) << '\n';
  if (report.outcome.io_error) throw Error(ErrorCode::RunIoError, *report.outcome.io_error);
  return report;
}

inline int cmd_run(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  const auto report = run_member(cfg, cfg.model.A, output_dir(cfg));
  log << outcome_line(report) << '\n';
  return report.outcome.blew_up() ? kExitBlowUp : kExitOk;
}

inline std::string member_dir_name(double A) { return "A_" + format_double(A); }

/// One worker per A, isolated state and output directories; the summary is
/// assembled after all members finish, ordered by A.
inline int cmd_sweep(const ExperimentConfig& cfg, std::vector<double> A_list, std::ostream& log = std::cout) {
  require(!A_list.empty(), ErrorCode::ConfigError, "sweep needs at least one A value");
  std::sort(A_list.begin(), A_list.end());
  const fs::path root = output_dir(cfg);
  fs::create_directories(root);
  std::vector<std::future<MemberReport>> jobs;
  for (double A : A_list)
    jobs.push_back(std::async(std::launch::async, [&cfg, A, &root] { return run_member(cfg, A, root / member_dir_name(A)); }));
  std::vector<MemberReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());

  std::ofstream summary(root / "summary.csv");
  summary << "A,outcome,delta_fit,sup_n_inf\n";
  bool any_blowup = false;
  for (const auto& r : reports) {
    any_blowup = any_blowup || r.outcome.blew_up();
    summary << format_double(r.A) << ',' << (r.outcome.blew_up() ? "BlowUp" : "Completed") << ','
            << (std::isnan(r.delta_fit) ? std::string("nan") : format_double(r.delta_fit)) << ','
            << format_double(r.outcome.sup_n) << '\n';
    log << "A=" << format_double(r.A) << ' ' << outcome_line(r) << '\n';
  }
  if (!summary) throw Error(ErrorCode::RunIoError, "cannot write summary.csv");
  return any_blowup ? kExitBlowUp : kExitOk;
}

/// Samples per passive run in the scaling study.
inline constexpr int kPsfitSamples = 100;

struct PsfitResult {
  std::vector<RatePoint> rates;
  std::vector<double> r_squared;
  ScalingFit fit;
};

/// Passive-scalar decay study with f_in = cos x. Each member runs to
/// horizon·√A in rescaled time.
inline PsfitResult psfit(const ExperimentConfig& cfg, const std::vector<double>& A_list) {
  const TorusGrid grid(cfg.grid.dim, cfg.grid.n_points);
  const Field f_in = Field::sample(grid, [](double x, double, double) { return std::cos(x); });
  PsfitResult out;
  for (double A : A_list) {
    MemberSetup setup = member_setup(cfg, A);
    setup.params.form = Form::Rescaled;
    const double T = cfg.time.horizon * std::sqrt(setup.params.A);
    const auto series = passive_run(f_in, setup.params, setup.flow, T, T / kPsfitSamples);
    const DecayFit fit = fit_decay(series);
    out.rates.push_back({setup.params.A, fit.rate});
    out.r_squared.push_back(fit.r_squared);
  }
  out.fit = scaling_exponent(out.rates);
  return out;
}

inline int cmd_psfit(const ExperimentConfig& cfg, const std::vector<double>& A_list, std::ostream& log = std::cout) {
  const fs::path root = output_dir(cfg);
  fs::create_directories(root);
  const auto result = psfit(cfg, A_list);
  std::ofstream table(root / "psfit.csv");
  table << "A,rate,r_squared\n";
  for (std::size_t i = 0; i < result.rates.size(); ++i)
    table << format_double(result.rates[i].A) << ',' << format_double(result.rates[i].rate) << ','
          << format_double(result.r_squared[i]) << '\n';
  table << "# alpha=" << format_double(result.fit.alpha) << " r_squared=" << format_double(result.fit.r_squared)
        << '\n';
  if (!table) throw Error(ErrorCode::RunIoError, "cannot write psfit.csv");
  log << "alpha=" << format_double(result.fit.alpha) << " r_squared=" << format_double(result.fit.r_squared) << '\n';
  return kExitOk;
}

inline void write_report(const fs::path& path, const std::vector<lab::CheckRow>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "name,lhs,rhs,ratio,pass\n";
  for (const auto& r : rows)
    out << r.name << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.ratio) << ','
        << (r.pass ? "true" : "false") << '\n';
  if (!out) throw Error(ErrorCode::RunIoError, "cannot write report " + path.string());
}

inline int cmd_check(const fs::path& report, std::ostream& log = std::cout) {
  const auto rows = lab::verification_suite();
  write_report(report, rows);
  bool ok = true;
  for (const auto& r : rows) {
    log << (r.pass ? "PASS " : "FAIL ") << r.name << " lhs=" << format_double(r.lhs) << " rhs=" << format_double(r.rhs)
        << '\n';
    ok = ok && r.pass;
  }
  return ok ? kExitOk : kExitError;
}

}  // namespace pks::experiments
