#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcell/orchestrator.hpp"
#include "fedcell/trust.hpp"

namespace fedcell::runlog {

class RunLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal rendering; "inf"/"-inf"/"nan" for the
/// non-finite values. Identical across platforms for identical doubles, so
/// logs are byte-comparable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kRunCsvHeader =
    "t,zeta_db,mode,n_participants,n_success,loss,accuracy";

inline std::string csv_row(const orchestrator::RoundRecord& rec) {
  std::string row;
  row += std::to_string(rec.t);
  row += ',';
  row += format_double(rec.zeta_db);
  row += ',';
  row += orchestrator::mode_name(rec.mode);
  row += ',';
  row += std::to_string(rec.participants.size());
  row += ',';
  row += std::to_string(rec.successes.size());
  row += ',';
  row += format_double(rec.loss);
  row += ',';
  row += format_double(rec.accuracy);
  return row;
}

inline void write_run_csv(const std::vector<orchestrator::RoundRecord>& records,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline games
  if (!out) throw RunLogError("cannot open for writing: " + path);
  out << kRunCsvHeader << '\n';
  for (const auto& rec : records) out << csv_row(rec) << '\n';
  if (!out) throw RunLogError("write failed: " + path);
}

/// Merged log of the three benchmark cases, one `case` column ahead of the
/// per-round fields.
inline void write_compare_csv(const orchestrator::CaseRuns& runs,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunLogError("cannot open for writing: " + path);
  out << "case," << kRunCsvHeader << '\n';
  const auto emit = [&](const char* label,
                        const std::vector<orchestrator::RoundRecord>& records) {
    for (const auto& rec : records) out << label << ',' << csv_row(rec) << '\n';
  };
  emit("A", runs.case_a);
  emit("B", runs.case_b);
  emit("C", runs.case_c);
  if (!out) throw RunLogError("write failed: " + path);
}

inline nlohmann::json round_to_json(const orchestrator::RoundRecord& rec) {
  nlohmann::json j;
  j["type"] = "round";
  j["t"] = rec.t;
  // JSON has no infinities; non-finite values travel as strings.
  j["zeta_db"] = std::isfinite(rec.zeta_db) ? nlohmann::json(rec.zeta_db)
                                            : nlohmann::json(format_double(rec.zeta_db));
  j["mode"] = orchestrator::mode_name(rec.mode);
  j["participants"] = rec.participants;
  j["successes"] = rec.successes;
  auto weights = nlohmann::json::array();
  for (double w : rec.weights) {
    if (std::isfinite(w)) {
      weights.push_back(w);
    } else {
      weights.push_back(format_double(w));
    }
  }
  j["weights"] = std::move(weights);
  j["train_objective"] = rec.train_objective;
  j["loss"] = rec.loss;
  j["accuracy"] = rec.accuracy;
  return j;
}

inline orchestrator::RoundRecord round_from_json(const nlohmann::json& j) {
  orchestrator::RoundRecord rec;
  rec.t = j.at("t").get<int>();
  const auto& z = j.at("zeta_db");
  rec.zeta_db = z.is_string() ? std::strtod(z.get<std::string>().c_str(), nullptr)
                              : z.get<double>();
  const std::string mode = j.at("mode").get<std::string>();
  rec.mode = mode == "trusted_only" ? orchestrator::Mode::TrustedOnly
                                    : orchestrator::Mode::RiskAgnostic;
  rec.participants = j.at("participants").get<std::vector<int>>();
  rec.successes = j.at("successes").get<std::vector<int>>();
  for (const auto& w : j.at("weights")) {
    rec.weights.push_back(w.is_string()
                              ? std::strtod(w.get<std::string>().c_str(), nullptr)
                              : w.get<double>());
  }
  rec.train_objective = j.at("train_objective").get<double>();
  rec.loss = j.at("loss").get<double>();
  rec.accuracy = j.at("accuracy").get<double>();
  return rec;
}

/// Score-count summary written into the JSONL header: category sizes plus a
/// ten-bin histogram of the scores.
inline nlohmann::json trust_summary(const std::vector<double>& scores,
                                    const trust::Partition& partition) {
  nlohmann::json j;
  j["n_clients"] = scores.size();
  j["fully_trusted"] = partition.fully_trusted.size();
  j["risky"] = partition.risky.size();
  j["malicious"] = partition.malicious.size();
  std::vector<int> hist(10, 0);
  for (double s : scores) {
    int bin = static_cast<int>(s * 10.0);
    if (bin > 9) bin = 9;
    if (bin < 0) bin = 0;
    ++hist[bin];
  }
  j["score_histogram"] = hist;
  return j;
}

/// JSONL run log: line 1 is a header object embedding the resolved config
/// and the trust summary; each following line is one round record.
inline void write_jsonl(const std::vector<orchestrator::RoundRecord>& records,
                        const std::string& path, const nlohmann::json& header_extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunLogError("cannot open for writing: " + path);
  nlohmann::json header = header_extra;
  header["type"] = "header";
  out << header.dump() << '\n';
  for (const auto& rec : records) out << round_to_json(rec).dump() << '\n';
  if (!out) throw RunLogError("write failed: " + path);
}

struct JsonlLog {
  nlohmann::json header;
  std::vector<orchestrator::RoundRecord> records;
};

inline JsonlLog read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunLogError("cannot open for reading: " + path);
  JsonlLog log;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw RunLogError(path + ":" + std::to_string(line_no) +
                        ": invalid JSONL line: " + e.what());
    }
    if (first) {
      if (j.value("type", "") != "header")
        throw RunLogError(path + ": first JSONL line must be the header record");
      log.header = j;
      first = false;
    } else {
      log.records.push_back(round_from_json(j));
    }
  }
  if (first) throw RunLogError(path + ": empty JSONL log");
  return log;
}

}  // namespace fedcell::runlog
