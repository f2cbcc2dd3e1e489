#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcell/channel.hpp"
#include "fedcell/config.hpp"
#include "fedcell/orchestrator.hpp"
#include "fedcell/runlog.hpp"

namespace fedcell::harness {

struct RunPaths {
  std::string csv;
  std::string jsonl;
};

inline nlohmann::json run_header(const ExperimentConfig& cfg,
                                 const orchestrator::ExperimentPlan& plan,
                                 orchestrator::Case c) {
  nlohmann::json header;
  header["case"] = orchestrator::case_name(c);
  header["config"] = cfg.resolved;
  header["trust"] = runlog::trust_summary(plan.trust_scores, plan.trust_partition);
  header["n_bs"] = plan.topology.bs_positions.size();
  header["n_clients"] = plan.n_clients();
  return header;
}

/// Runs one case end to end and writes CSV + JSONL logs into out_dir.
inline RunPaths cmd_run(const ExperimentConfig& cfg, orchestrator::Case c) {
  const orchestrator::ExperimentPlan plan = orchestrator::build_plan(cfg.settings);
  const std::vector<orchestrator::RoundRecord> records =
      orchestrator::run_experiment_on(plan, c);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw runlog::RunLogError("cannot create output directory " + cfg.out_dir +
                              ": " + ec.message());
  RunPaths paths;
  const std::string stem =
      cfg.out_dir + "/case_" + orchestrator::case_name(c);
  paths.csv = stem + ".csv";
  paths.jsonl = stem + ".jsonl";
  runlog::write_run_csv(records, paths.csv);
  runlog::write_jsonl(records, paths.jsonl, run_header(cfg, plan, c));
  return paths;
}

struct ComparePaths {
  std::string merged_csv;
  std::vector<std::string> jsonl;
};

/// Runs cases A, B, C against one shared plan, writes the merged CSV plus a
/// JSONL log per case.
inline ComparePaths cmd_compare_cases(const ExperimentConfig& cfg) {
  const orchestrator::CaseRuns runs = orchestrator::compare_cases(cfg.settings);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw runlog::RunLogError("cannot create output directory " + cfg.out_dir +
                              ": " + ec.message());
  ComparePaths paths;
  paths.merged_csv = cfg.out_dir + "/compare_cases.csv";
  runlog::write_compare_csv(runs, paths.merged_csv);
  const auto dump_case = [&](orchestrator::Case c,
                             const std::vector<orchestrator::RoundRecord>& records) {
    const std::string path =
        cfg.out_dir + "/case_" + orchestrator::case_name(c) + ".jsonl";
    runlog::write_jsonl(records, path, run_header(cfg, runs.plan, c));
    paths.jsonl.push_back(path);
  };
  dump_case(orchestrator::Case::A_RiskAware, runs.case_a);
  dump_case(orchestrator::Case::B_RiskAgnostic, runs.case_b);
  dump_case(orchestrator::Case::C_Conservative, runs.case_c);
  return paths;
}

struct ValidateChannelResult {
  std::string csv_path;
  double max_abs_err = 0.0;
  double tolerance = 0.01;
  bool passed = false;
};

/// Analytic-vs-Monte-Carlo audit of the success probability over a
/// (zeta, r) grid. One interference ensemble is shared by every cell
/// (interference statistics do not depend on the cell). fault_scale is a
/// test-only fault injection that multiplies the analytic column.
inline ValidateChannelResult cmd_validate_channel(
    const ExperimentConfig& cfg, const std::vector<double>& zeta_db_grid,
    const std::vector<double>& r_grid, std::size_t n_draws,
    const std::string& out_path, double fault_scale = 1.0) {
  if (zeta_db_grid.empty() || r_grid.empty())
    throw ConfigError("validate-channel: empty grid");
  if (n_draws == 0) throw ConfigError("validate-channel: n_draws must be > 0");

  const channel::ChannelParams& params = cfg.settings.channel;
  rng::Rng gen = rng::substream(cfg.settings.seed, "mc");
  const channel::InterferenceEnsemble ensemble(params, n_draws, gen);

  const std::filesystem::path out_file(out_path);
  if (out_file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out_file.parent_path(), ec);
    if (ec)
      throw runlog::RunLogError("cannot create output directory " +
                                out_file.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw runlog::RunLogError("cannot open for writing: " + out_path);
  out << "zeta_db,r,S_analytic,S_montecarlo,abs_err\n";

  ValidateChannelResult result;
  result.csv_path = out_path;
  for (double zeta_db : zeta_db_grid) {
    const double zeta = channel::db_to_linear(zeta_db);
    for (double r : r_grid) {
      const double analytic =
          fault_scale * channel::success_probability(zeta, r, params);
      const double empirical = ensemble.estimate_success(zeta, r, gen);
      const double err = std::abs(analytic - empirical);
      result.max_abs_err = std::max(result.max_abs_err, err);
      out << runlog::format_double(zeta_db) << ',' << runlog::format_double(r)
          << ',' << runlog::format_double(analytic) << ','
          << runlog::format_double(empirical) << ',' << runlog::format_double(err)
          << '\n';
    }
  }
  if (!out) throw runlog::RunLogError("write failed: " + out_path);
  result.passed = result.max_abs_err <= result.tolerance;
  return result;
}

}  // namespace fedcell::harness
