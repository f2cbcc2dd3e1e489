// fedcell command-line driver: run single cases, compare the three benchmark
// cases, audit the channel analytics against Monte Carlo, or print the
// default configuration.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedcell/commands.hpp"
#include "fedcell/config.hpp"
#include "fedcell/orchestrator.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw fedcell::harness::ConfigError("cannot parse " + what + " entry '" +
                                          item + "' as a number");
    }
  }
  if (out.empty())
    throw fedcell::harness::ConfigError(what + " list is empty");
  return out;
}

fedcell::harness::ExperimentConfig load_config(const std::string& config_path,
                                               bool seed_set, std::uint64_t seed,
                                               const std::string& out_dir) {
  fedcell::harness::ExperimentConfig cfg =
      config_path.empty()
          ? fedcell::harness::config_from_json(nlohmann::json::object())
          : fedcell::harness::parse_config(config_path);
  if (seed_set) {
    cfg.settings.seed = seed;
    cfg.resolved["seed"] = seed;
  }
  if (!out_dir.empty()) {
    cfg.out_dir = out_dir;
    cfg.resolved["out_dir"] = out_dir;
  }
  return cfg;
}

fedcell::orchestrator::Case parse_case(const std::string& label) {
  if (label == "A") return fedcell::orchestrator::Case::A_RiskAware;
  if (label == "B") return fedcell::orchestrator::Case::B_RiskAgnostic;
  if (label == "C") return fedcell::orchestrator::Case::C_Conservative;
  throw fedcell::harness::ConfigError("--case must be A, B, or C");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedcell: risk-aware federated learning over a cellular uplink"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  // run
  auto* run = app.add_subcommand("run", "run one experiment case");
  std::string case_label;
  run->add_option("--config", config_path, "JSON config file (defaults when omitted)");
  run->add_option("--case", case_label, "experiment case: A, B, or C")->required();
  run->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("--out", out_dir, "override the output directory");

  // compare-cases
  auto* compare = app.add_subcommand(
      "compare-cases", "run cases A, B, C with a shared seed and merge the logs");
  compare->add_option("--config", config_path, "JSON config file (defaults when omitted)");
  compare->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  compare->add_option("--out", out_dir, "override the output directory");

  // validate-channel
  auto* validate = app.add_subcommand(
      "validate-channel", "audit analytic success probabilities against Monte Carlo");
  std::string zeta_db_csv = "0,5,10,15";
  std::string r_csv = "50,100,200,400";
  std::size_t n_draws = 100000;
  double fault_scale = 1.0;
  std::string out_file;
  validate->add_option("--config", config_path, "JSON config file (defaults when omitted)");
  validate->add_option("--zeta-db", zeta_db_csv, "comma-separated thresholds in dB");
  validate->add_option("--r", r_csv, "comma-separated user distances in meters");
  validate->add_option("--draws", n_draws, "Monte Carlo draws per grid cell");
  validate->add_option("--fault-scale", fault_scale,
                       "test-only: scale the analytic column to exercise the audit");
  validate->add_option("--out", out_file, "output CSV path");
  validate->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });

  // print-defaults
  auto* defaults = app.add_subcommand("print-defaults",
                                      "print the default configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (defaults->parsed()) {
      std::cout << fedcell::harness::default_config_json().dump(2) << "\n";
      return 0;
    }
    const fedcell::harness::ExperimentConfig cfg =
        load_config(config_path, seed_set, seed, out_dir);

    if (run->parsed()) {
      const auto paths = fedcell::harness::cmd_run(cfg, parse_case(case_label));
      std::cout << "wrote " << paths.csv << "\n";
      std::cout << "wrote " << paths.jsonl << "\n";
      return 0;
    }
    if (compare->parsed()) {
      const auto paths = fedcell::harness::cmd_compare_cases(cfg);
      std::cout << "wrote " << paths.merged_csv << "\n";
      for (const auto& p : paths.jsonl) std::cout << "wrote " << p << "\n";
      return 0;
    }
    if (validate->parsed()) {
      const std::string out_path =
          out_file.empty() ? cfg.out_dir + "/validate_channel.csv" : out_file;
      const auto result = fedcell::harness::cmd_validate_channel(
          cfg, parse_list(zeta_db_csv, "--zeta-db"), parse_list(r_csv, "--r"),
          n_draws, out_path, fault_scale);
      std::cout << "wrote " << result.csv_path << "\n";
      std::cout << "max |analytic - monte carlo| = " << result.max_abs_err
                << " (tolerance " << result.tolerance << ")\n";
      if (!result.passed) {
        std::cerr << "validate-channel: tolerance exceeded\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
