#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcell/channel.hpp"
#include "fedcell/orchestrator.hpp"

namespace fedcell::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every key the flat config file accepts; all optional, defaults below.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "lambda_bs_per_km2", "area_side_m", "n_rb", "n_users_per_test_cell",
      "interferer_activity", "tx_power_dbm", "noise_dbm", "path_loss_eta",
      "trust_alpha", "trust_beta", "rho", "kappa",
      "learning_rate", "momentum", "local_epochs", "batch_size",
      "model", "mlp_hidden",
      "dataset", "mnist_dir", "synthetic_n", "synthetic_dim",
      "synthetic_classes", "synthetic_class_sep", "synthetic_noise",
      "validation_fraction", "partition", "dirichlet_alpha",
      "zeta_start_db", "zeta_end_db", "zeta_step_db", "rounds",
      "trust_window_mu", "normalize", "debias_floor",
      "seed", "threads", "out_dir"};
  return keys;
}

inline nlohmann::json default_config_json() {
  nlohmann::json j;
  j["lambda_bs_per_km2"] = 50.0;
  j["area_side_m"] = 10000.0;
  j["n_rb"] = 30;
  j["n_users_per_test_cell"] = 25;
  j["interferer_activity"] = 1.0;
  j["tx_power_dbm"] = 10.0;
  j["noise_dbm"] = -100.0;
  j["path_loss_eta"] = 4.0;
  j["trust_alpha"] = 3.0;
  j["trust_beta"] = 1.0;
  j["rho"] = 0.9;
  j["kappa"] = 0.3;
  j["learning_rate"] = 0.01;
  j["momentum"] = 0.5;
  j["local_epochs"] = 1;
  j["batch_size"] = 32;
  j["model"] = "logistic";
  j["mlp_hidden"] = 64;
  j["dataset"] = "synthetic";
  j["mnist_dir"] = "";
  j["synthetic_n"] = 5000;
  j["synthetic_dim"] = 16;
  j["synthetic_classes"] = 10;
  j["synthetic_class_sep"] = 1.0;
  j["synthetic_noise"] = 1.0;
  j["validation_fraction"] = 0.2;
  j["partition"] = "iid";
  j["dirichlet_alpha"] = 0.5;
  j["zeta_start_db"] = 10.0;
  j["zeta_end_db"] = 0.0;
  j["zeta_step_db"] = 0.25;
  j["rounds"] = 150;
  j["trust_window_mu"] = 5;
  j["normalize"] = "participants";
  j["debias_floor"] = 1e-12;
  j["seed"] = 1;
  j["threads"] = 1;
  j["out_dir"] = "runs";
  return j;
}

namespace detail {

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string suggest_keys(const std::string& unknown) {
  // Suggest every known key within a small edit distance of the typo (or of
  // its prefix, so "lamda" still pulls in "lambda_bs_per_km2").
  std::vector<std::pair<int, std::string>> ranked;
  for (const std::string& key : config_keys()) {
    const std::string head = key.substr(0, std::min(key.size(), unknown.size() + 2));
    const int d = std::min(levenshtein(unknown, key), levenshtein(unknown, head));
    ranked.push_back({d, key});
  }
  std::sort(ranked.begin(), ranked.end());
  std::string out;
  for (const auto& [d, key] : ranked) {
    if (d > std::max<int>(2, static_cast<int>(unknown.size()) / 3)) break;
    if (!out.empty()) out += ", ";
    out += "'" + key + "'";
    if (out.size() > 80) break;
  }
  return out;
}

inline const nlohmann::json& field(const nlohmann::json& file,
                                   const nlohmann::json& defaults,
                                   const std::string& key) {
  return file.contains(key) ? file.at(key) : defaults.at(key);
}

inline double num(const nlohmann::json& file, const nlohmann::json& defaults,
                  const std::string& key) {
  const nlohmann::json& v = field(file, defaults, key);
  if (!v.is_number())
    throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

inline long long integer(const nlohmann::json& file, const nlohmann::json& defaults,
                         const std::string& key) {
  const nlohmann::json& v = field(file, defaults, key);
  if (!v.is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<long long>();
}

inline std::uint64_t unsigned64(const nlohmann::json& file,
                                const nlohmann::json& defaults,
                                const std::string& key) {
  const nlohmann::json& v = field(file, defaults, key);
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)))
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string text(const nlohmann::json& file, const nlohmann::json& defaults,
                        const std::string& key) {
  const nlohmann::json& v = field(file, defaults, key);
  if (!v.is_string())
    throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

template <typename T>
void require(bool ok, const std::string& key, const T& value,
             const std::string& what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "config key '" << key << "' " << what << " (got " << value << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace detail

struct ExperimentConfig {
  orchestrator::ExperimentSettings settings;
  std::string model = "logistic";
  std::string out_dir = "runs";
  nlohmann::json resolved;  // defaults overlaid with the file's values
};

inline ExperimentConfig config_from_json(const nlohmann::json& file) {
  using namespace detail;
  if (!file.is_object())
    throw ConfigError("config must be a JSON object of key/value pairs");
  const nlohmann::json defaults = default_config_json();

  for (const auto& [key, value] : file.items()) {
    if (std::find(config_keys().begin(), config_keys().end(), key) ==
        config_keys().end()) {
      std::string msg = "unknown config key '" + key + "'";
      const std::string suggestions = suggest_keys(key);
      if (!suggestions.empty()) msg += "; did you mean " + suggestions + "?";
      throw ConfigError(msg);
    }
    (void)value;
  }

  ExperimentConfig cfg;
  cfg.resolved = defaults;
  for (const auto& [key, value] : file.items()) cfg.resolved[key] = value;

  auto& s = cfg.settings;

  const double lambda_km2 = num(file, defaults, "lambda_bs_per_km2");
  require(lambda_km2 > 0.0, "lambda_bs_per_km2", lambda_km2, "must be > 0");
  const double area_side = num(file, defaults, "area_side_m");
  require(area_side > 0.0, "area_side_m", area_side, "must be > 0");
  const long long n_rb = integer(file, defaults, "n_rb");
  require(n_rb >= 1, "n_rb", n_rb, "must be >= 1");
  const long long n_users = integer(file, defaults, "n_users_per_test_cell");
  require(n_users >= 1, "n_users_per_test_cell", n_users, "must be >= 1");
  if (n_users > n_rb)
    throw ConfigError("config invariant violated: n_users_per_test_cell (" +
                      std::to_string(n_users) + ") must be <= n_rb (" +
                      std::to_string(n_rb) + ")");
  const double activity = num(file, defaults, "interferer_activity");
  require(activity >= 0.0 && activity <= 1.0, "interferer_activity", activity,
          "must be in [0, 1]");
  s.geometry.bs_density = lambda_km2 * 1e-6;
  s.geometry.area_side = area_side;
  s.geometry.n_rb = static_cast<int>(n_rb);
  s.geometry.n_users_per_test_cell = static_cast<int>(n_users);
  s.geometry.interferer_activity = activity;

  const double eta = num(file, defaults, "path_loss_eta");
  require(eta > 2.0, "path_loss_eta", eta,
          "must be > 2 (the interference integral diverges otherwise)");
  s.channel.tx_power_w = channel::dbm_to_watts(num(file, defaults, "tx_power_dbm"));
  s.channel.noise_w = channel::dbm_to_watts(num(file, defaults, "noise_dbm"));
  s.channel.path_loss_eta = eta;
  s.channel.bs_density = s.geometry.bs_density;

  const double alpha = num(file, defaults, "trust_alpha");
  require(alpha > 0.0, "trust_alpha", alpha, "must be > 0");
  const double beta = num(file, defaults, "trust_beta");
  require(beta > 0.0, "trust_beta", beta, "must be > 0");
  const double rho = num(file, defaults, "rho");
  require(rho > 0.0 && rho <= 1.0, "rho", rho, "must be in (0, 1]");
  const double kappa = num(file, defaults, "kappa");
  require(kappa >= 0.0 && kappa < 1.0, "kappa", kappa, "must be in [0, 1)");
  if (!(kappa < rho))
    throw ConfigError("config invariant violated: kappa (" + std::to_string(kappa) +
                      ") must be < rho (" + std::to_string(rho) + ")");
  s.trust.alpha = alpha;
  s.trust.beta = beta;
  s.trust.rho = rho;
  s.trust.kappa = kappa;

  const double lr = num(file, defaults, "learning_rate");
  require(lr >= 0.0, "learning_rate", lr, "must be >= 0");
  const double momentum = num(file, defaults, "momentum");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", momentum, "must be in [0, 1)");
  const long long epochs = integer(file, defaults, "local_epochs");
  require(epochs >= 1, "local_epochs", epochs, "must be >= 1");
  const long long batch = integer(file, defaults, "batch_size");
  require(batch >= 1, "batch_size", batch, "must be >= 1");
  s.train.learning_rate = lr;
  s.train.momentum = momentum;
  s.train.local_epochs = static_cast<int>(epochs);
  s.train.batch_size = static_cast<int>(batch);

  cfg.model = text(file, defaults, "model");
  if (cfg.model != "logistic" && cfg.model != "mlp")
    throw ConfigError("config key 'model' must be 'logistic' or 'mlp'");
  const long long hidden = integer(file, defaults, "mlp_hidden");
  if (cfg.model == "mlp")
    require(hidden >= 1, "mlp_hidden", hidden, "must be >= 1 when model is 'mlp'");
  s.mlp_hidden = cfg.model == "mlp" ? static_cast<int>(hidden) : 0;

  s.dataset = text(file, defaults, "dataset");
  if (s.dataset != "synthetic" && s.dataset != "mnist")
    throw ConfigError("config key 'dataset' must be 'synthetic' or 'mnist'");
  s.mnist_dir = text(file, defaults, "mnist_dir");
  if (s.dataset == "mnist" && s.mnist_dir.empty())
    throw ConfigError(
        "missing required key 'mnist_dir' (required when dataset is 'mnist')");
  const long long syn_n = integer(file, defaults, "synthetic_n");
  require(syn_n >= 1, "synthetic_n", syn_n, "must be >= 1");
  const long long syn_dim = integer(file, defaults, "synthetic_dim");
  require(syn_dim >= 1, "synthetic_dim", syn_dim, "must be >= 1");
  const long long syn_classes = integer(file, defaults, "synthetic_classes");
  require(syn_classes >= 2, "synthetic_classes", syn_classes, "must be >= 2");
  const double sep = num(file, defaults, "synthetic_class_sep");
  require(sep >= 0.0, "synthetic_class_sep", sep, "must be >= 0");
  const double noise = num(file, defaults, "synthetic_noise");
  require(noise >= 0.0, "synthetic_noise", noise, "must be >= 0");
  s.synthetic.n = static_cast<std::size_t>(syn_n);
  s.synthetic.dim = static_cast<int>(syn_dim);
  s.synthetic.n_classes = static_cast<int>(syn_classes);
  s.synthetic.class_sep = sep;
  s.synthetic.noise = noise;

  const double val_frac = num(file, defaults, "validation_fraction");
  require(val_frac > 0.0 && val_frac < 1.0, "validation_fraction", val_frac,
          "must be in (0, 1)");
  s.validation_fraction = val_frac;
  const std::string part = text(file, defaults, "partition");
  if (part == "iid") {
    s.partition = learning::PartitionMode::IID;
  } else if (part == "dirichlet") {
    s.partition = learning::PartitionMode::Dirichlet;
  } else {
    throw ConfigError("config key 'partition' must be 'iid' or 'dirichlet'");
  }
  const double dir_alpha = num(file, defaults, "dirichlet_alpha");
  require(dir_alpha > 0.0, "dirichlet_alpha", dir_alpha, "must be > 0");
  s.dirichlet_alpha = dir_alpha;

  s.zeta_start_db = num(file, defaults, "zeta_start_db");
  s.zeta_end_db = num(file, defaults, "zeta_end_db");
  if (!(s.zeta_start_db >= s.zeta_end_db))
    throw ConfigError("config invariant violated: zeta_start_db (" +
                      std::to_string(s.zeta_start_db) +
                      ") must be >= zeta_end_db (" + std::to_string(s.zeta_end_db) + ")");
  const double step = num(file, defaults, "zeta_step_db");
  require(step > 0.0, "zeta_step_db", step, "must be > 0");
  s.zeta_step_db = step;
  const long long rounds = integer(file, defaults, "rounds");
  require(rounds >= 1, "rounds", rounds, "must be >= 1");
  s.rounds = static_cast<int>(rounds);

  const long long mu = integer(file, defaults, "trust_window_mu");
  require(mu >= 1, "trust_window_mu", mu, "must be >= 1");
  s.trust_window_mu = static_cast<int>(mu);
  const std::string norm = text(file, defaults, "normalize");
  if (norm == "participants") {
    s.normalize = orchestrator::Normalize::Participants;
  } else if (norm == "received") {
    s.normalize = orchestrator::Normalize::Received;
  } else {
    throw ConfigError("config key 'normalize' must be 'participants' or 'received'");
  }
  const double floor = num(file, defaults, "debias_floor");
  require(floor > 0.0, "debias_floor", floor, "must be > 0");
  s.debias_floor = floor;

  s.seed = unsigned64(file, defaults, "seed");
  const long long threads = integer(file, defaults, "threads");
  require(threads >= 1, "threads", threads, "must be >= 1");
  s.threads = static_cast<int>(threads);
  cfg.out_dir = text(file, defaults, "out_dir");

  s.validate();  // backstop; every violation above should already be named
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fedcell::harness
