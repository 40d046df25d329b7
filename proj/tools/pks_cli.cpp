// Command-line driver: run, sweep, psfit, check.
#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "pks/pks.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shear-advected Patlak-Keller-Segel experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<double> A_list;
  std::string report_path = "check_report.csv";

  auto* run = app.add_subcommand("run", "single simulation");
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "one simulation per A, run concurrently");
  sweep->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--A", A_list, "comma-separated A values (0 = no flow)")->required()->delimiter(',');

  auto* psfit = app.add_subcommand("psfit", "passive-scalar decay rates and fitted exponent");
  psfit->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  psfit->add_option("--A", A_list, "comma-separated A values")->required()->delimiter(',');

  auto* check = app.add_subcommand("check", "functional-lab verification report");
  check->add_option("--report", report_path, "report CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return pks::experiments::cmd_run(pks::load_config(config_path));
    if (*sweep) return pks::experiments::cmd_sweep(pks::load_config(config_path), A_list);
    if (*psfit) return pks::experiments::cmd_psfit(pks::load_config(config_path), A_list);
    if (*check) return pks::experiments::cmd_check(report_path);
  } catch (const pks::Error& e) {
    std::cerr << "error [" << pks::to_string(e.code()) << "]: " << e.what() << '\n';
    return pks::experiments::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pks::experiments::kExitError;
  }
  return pks::experiments::kExitError;
}
