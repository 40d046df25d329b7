#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace pks;
namespace fs = std::filesystem;

#ifndef PKS_SOURCE_DIR
#error "PKS_SOURCE_DIR must point at the repository root"
#endif

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pks_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode config_error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c, ExperimentConfig{});
  EXPECT_EQ(c.grid.dim, 2);
  EXPECT_EQ(c.grid.n_points, 64);
  EXPECT_EQ(c.model.A, 1024.0);
  EXPECT_EQ(c.model.M, 3);
  EXPECT_EQ(c.flow.kind, "StationaryCos");
  EXPECT_FALSE(c.time.theta.has_value());
}

TEST(Config, SampleRoundTripsByteIdentically) {
  const std::string text = slurp(fs::path(PKS_SOURCE_DIR) / "examples_cfg" / "sample.cfg");
  const ExperimentConfig c = parse_config(text);
  EXPECT_EQ(serialize(c), text);
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_EQ(c.grid.dim, 3);
  EXPECT_NEAR(*c.time.theta, 1.0 / (108 * (2 + 3)), 1e-18);
}

TEST(Config, LoadFromFile) {
  const fs::path path = fs::path(PKS_SOURCE_DIR) / "examples_cfg" / "sample.cfg";
  EXPECT_EQ(load_config(path.string()), parse_config(slurp(path)));
  try {
    (void)load_config((fs::temp_directory_path() / "pks_no_such_config.cfg").string());
    FAIL() << "missing file accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Config, CommentsSectionsAndDottedKeys) {
  const auto c = parse_config(
      "# leading comment\n"
      "model.A = 64   # trailing\n"
      "[flow]\n"
      "  kind = AlternatingCos\n"
      "period=2.5\n"
      "[init]\r\n"
      "seed = 18446744073709551615\r\n");
  EXPECT_EQ(c.model.A, 64.0);
  EXPECT_EQ(c.flow.kind, "AlternatingCos");
  EXPECT_EQ(c.flow.period, 2.5);
  EXPECT_EQ(c.init.seed, 18446744073709551615ull);
  EXPECT_TRUE(std::holds_alternative<flow::AlternatingCos>(c.flow_spec().kind));
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(config_error_of("model.A = -1"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[model]\nM = 2"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[grid]\nn_points = 63"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[grid]\nwidth = 3"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[colour]\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[model]\nA = 1e3x"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[model]\ndealias = yes"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[flow]\nkind = Poiseuille"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("just words"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error_of("[model]\ndt_min = 1\ndt_max = 0.5"), ErrorCode::ConfigError);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    (void)parse_config("[grid]\ndim = 2\n\nn_points = 5\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Init, UniformDensity) {
  ExperimentConfig c;
  c.init.preset = Preset::Uniform;
  c.init.mass = 0.5;
  const PksState s = make_initial(c);
  EXPECT_NEAR(min_value(s.n), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(max_value(s.n), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_EQ(max_abs(s.C), 0.0);
  c.grid.dim = 3;
  const double target = 0.5 * 8 * std::numbers::pi * kTwoPi;
  EXPECT_NEAR(integral(make_initial(c).n) / target, 1.0, 1e-10);
}

TEST(Init, GaussianBumpMassAndPositivity) {
  ExperimentConfig c;
  c.grid.n_points = 128;
  c.init.mass = 1.5;
  c.init.bump_width = 0.2;
  const PksState s = make_initial(c);
  const double target = 1.5 * 8 * std::numbers::pi;
  EXPECT_NEAR(oracle::quadrature(testing_support::to_vector(s.n), 2, 128) / target, 1.0, 1e-10);
  EXPECT_GT(min_value(s.n), 0.0);
  // peaked at (π, π)
  EXPECT_EQ(max_value(s.n), s.n.at(64, 64));
}

TEST(Init, GaussianBumpNeedsResolution) {
  ExperimentConfig c;
  c.grid.n_points = 32;
  c.init.bump_width = 0.5;  // 3Δx ≈ 0.589
  try {
    (void)make_initial(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnderResolved);
  }
}

TEST(Init, PerturbationScalesWithA) {
  ExperimentConfig c;
  c.init.preset = Preset::UniformPlusXPerturb;
  c.init.perturb_eps = 0.1;
  c.grid.dim = 3;
  c.grid.n_points = 16;
  const PksState s1 = make_initial(c, 1.0);
  const double nbar = 0.5 * 8 * std::numbers::pi / std::pow(kTwoPi, 2);
  const double rel = l2_norm(remainder(s1.n)) / l2_norm(s1.n);
  // n_≠ = n̄·eps·cos x·g with max|g| = 1, so the ratio is eps·‖cos x g‖/‖n‖ ≤ eps/√2
  EXPECT_GT(rel, 0.0);
  EXPECT_LE(rel, 0.1 / std::sqrt(2.0) + 1e-12);
  EXPECT_NEAR(max_abs(remainder(s1.n)) / nbar, 0.1, 1e-12);
  EXPECT_NEAR(integral(s1.n) / (0.5 * 8 * std::numbers::pi * kTwoPi), 1.0, 1e-10);
  EXPECT_GT(min_value(s1.n), 0.0);

  const PksState s16 = make_initial(c, 16.0);
  EXPECT_NEAR(max_abs(remainder(s16.n)) / nbar, 0.1 * std::pow(16.0, -2.0), 1e-14);
  // same seed, same profile
  EXPECT_EQ(testing_support::to_vector(make_initial(c, 16.0).n), testing_support::to_vector(s16.n));
}

TEST(Csv, HeaderAndRow) {
  EXPECT_EQ(kDiagnosticsHeader, "t,mass,mean_C,min_n,max_n,l2_n_neq,l2_gradC_neq,F_M,E,S,P,dt_used,positivity_flag");
  FunctionalValues v;
  v.t = 0.5;
  v.mass = 1.25;
  v.positivity_flag = true;
  const std::string row = csv_row(v);
  EXPECT_EQ(row, "0.5,1.25,0,0,0,0,0,0,0,0,0,0,1");
}

TEST(Snapshot, ByteIdenticalRoundTrip) {
  std::mt19937_64 rng(51);
  const TorusGrid g(3, 8);
  const Snapshot snap{1.75, 4096.0, testing_support::noise(g, rng), testing_support::noise(g, rng)};
  const fs::path dir = scratch("snap");
  write_snapshot(dir / "a.pks", snap);
  const Snapshot back = read_snapshot(dir / "a.pks");
  write_snapshot(dir / "b.pks", back);
  const std::string a = slurp(dir / "a.pks"), b = slurp(dir / "b.pks");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 32u + 2 * 512 * 8);
  EXPECT_EQ(a.substr(0, 4), "PKS1");
  EXPECT_EQ(back.t, 1.75);
  EXPECT_EQ(back.A, 4096.0);
  EXPECT_EQ(testing_support::to_vector(back.n), testing_support::to_vector(snap.n));
  EXPECT_EQ(testing_support::to_vector(back.C), testing_support::to_vector(snap.C));
}

TEST(Snapshot, LittleEndianHeaderLayout) {
  const TorusGrid g(2, 8);
  const auto buf = encode_snapshot({2.0, 3.0, Field(g, 1.0), Field(g)});
  // version 1, dim 2, N 8 as little-endian u32
  EXPECT_EQ(buf[4], 1);
  EXPECT_EQ(buf[5], 0);
  EXPECT_EQ(buf[8], 2);
  EXPECT_EQ(buf[12], 8);
  // 2.0 = 0x4000000000000000
  EXPECT_EQ(buf[23], 0x40);
  EXPECT_EQ(buf[16], 0x00);
  // first payload value 1.0 = 0x3FF0000000000000
  EXPECT_EQ(buf[39], 0x3F);
  EXPECT_EQ(buf[38], 0xF0);
}

TEST(Snapshot, CorruptInputsRejected) {
  const TorusGrid g(2, 8);
  const auto good = encode_snapshot({0.0, 1.0, Field(g, 1.0), Field(g)});
  auto expect_format_error = [](const std::vector<unsigned char>& b) {
    try {
      (void)decode_snapshot(b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SnapshotFormat);
    }
  };
  auto bad = good;
  bad[0] = 'X';
  expect_format_error(bad);
  bad = good;
  bad[4] = 2;
  expect_format_error(bad);
  bad = good;
  bad.pop_back();
  expect_format_error(bad);
  expect_format_error({good.begin(), good.begin() + 20});
}

TEST(Experiments, RunWritesArtifacts) {
  const fs::path dir = scratch("run");
  ExperimentConfig c;
  c.grid.n_points = 16;
  c.init.preset = Preset::Uniform;
  c.time.horizon = 1.0;
  c.time.sample_every = 0.25;
  c.output.dir = dir.string();
  c.output.snapshots_every = 0.5;
  std::ostringstream log;
  EXPECT_EQ(experiments::cmd_run(c, log), experiments::kExitOk);
  EXPECT_EQ(log.str().rfind("outcome=Completed", 0), 0u);
  const std::string csv = slurp(dir / "diagnostics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kDiagnosticsHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_TRUE(fs::exists(dir / "snapshots" / "snap_00002.pks"));
  EXPECT_EQ(read_snapshot(dir / "snapshots" / "snap_00002.pks").t, 1.0);
  EXPECT_TRUE(fs::exists(dir / "outcome.txt"));
}

TEST(Experiments, ThetaSampleRecorded) {
  const fs::path dir = scratch("theta");
  ExperimentConfig c;
  c.grid.dim = 2;
  c.grid.n_points = 16;
  c.model.A = 64;
  c.init.preset = Preset::UniformPlusXPerturb;
  c.time.horizon = 6.0;
  c.time.sample_every = 1.0;
  c.time.theta = 0.1;
  c.output.dir = dir.string();
  std::ostringstream log;
  EXPECT_EQ(experiments::cmd_run(c, log), experiments::kExitOk);
  const std::string line = slurp(dir / "outcome.txt");
  // 64^{1/3 + 0.1} = 6.06 > horizon → not reached; 0.0 keeps it inside
  EXPECT_EQ(line.find("theta_F_M"), std::string::npos);
  c.time.theta = 0.0;
  EXPECT_EQ(experiments::cmd_run(c, log), experiments::kExitOk);
  const std::string again = slurp(dir / "outcome.txt");
  const auto at = again.find("theta_t=");
  ASSERT_NE(at, std::string::npos) << again;
  EXPECT_NEAR(std::stod(again.substr(at + 8)), 4.0, 1e-12);
  EXPECT_NE(again.find("theta_F_M="), std::string::npos);
}

TEST(Experiments, SweepSummaryDeterministicAndOrdered) {
  ExperimentConfig c;
  c.grid.n_points = 16;
  c.init.preset = Preset::UniformPlusXPerturb;
  c.init.perturb_eps = 0.5;
  c.time.horizon = 2.0;
  c.time.sample_every = 0.1;
  std::string summaries[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = scratch("sweep" + std::to_string(i));
    c.output.dir = dir.string();
    std::ostringstream log;
    EXPECT_EQ(experiments::cmd_sweep(c, {256, 4, 0, 16}, log), experiments::kExitOk);
    summaries[i] = slurp(dir / "summary.csv");
    for (const char* sub : {"A_0", "A_4", "A_16", "A_256"}) EXPECT_TRUE(fs::exists(dir / sub / "diagnostics.csv"));
  }
  EXPECT_EQ(summaries[0], summaries[1]);
  std::istringstream rows(summaries[0]);
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "A,outcome,delta_fit,sup_n_inf");
  std::vector<std::string> order;
  while (std::getline(rows, line)) order.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(order, (std::vector<std::string>{"0", "4", "16", "256"}));
}

TEST(Experiments, OutputDirOverride) {
  const fs::path dir = scratch("override");
  ExperimentConfig c;
  c.output.dir = "/nonexistent/should/not/be/used";
  ::setenv("PKS_OUTPUT_DIR", dir.string().c_str(), 1);
  EXPECT_EQ(experiments::output_dir(c), dir);
  ::unsetenv("PKS_OUTPUT_DIR");
  EXPECT_EQ(experiments::output_dir(c), fs::path(c.output.dir));
}

TEST(Experiments, PsfitHeatBaseline) {
  ExperimentConfig c;
  c.flow.kind = "Zero";
  c.time.horizon = 2.0;
  const auto r = experiments::psfit(c, {64, 256, 1024, 4096});
  EXPECT_NEAR(r.fit.alpha, 1.0, 0.02);
  for (const auto& p : r.rates) EXPECT_NEAR(p.rate * p.A, 1.0, 0.01);
}

TEST(Experiments, CheckWritesReport) {
  const fs::path dir = scratch("check");
  std::ostringstream log;
  EXPECT_EQ(experiments::cmd_check(dir / "nested" / "report.csv", log), experiments::kExitOk);
  const std::string report = slurp(dir / "nested" / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "name,lhs,rhs,ratio,pass");
  EXPECT_EQ(report.find(",false"), std::string::npos);
}
