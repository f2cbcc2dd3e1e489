#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fedcell/channel.hpp"
#include "fedcell/dataset.hpp"
#include "fedcell/geometry.hpp"
#include "fedcell/learning.hpp"
#include "fedcell/model.hpp"
#include "fedcell/rng.hpp"
#include "fedcell/trust.hpp"

namespace fedcell::orchestrator {

enum class Case { A_RiskAware, B_RiskAgnostic, C_Conservative };
enum class Mode { RiskAgnostic, TrustedOnly };

inline const char* case_name(Case c) {
  switch (c) {
    case Case::A_RiskAware: return "A";
    case Case::B_RiskAgnostic: return "B";
    case Case::C_Conservative: return "C";
  }
  return "?";
}

inline const char* mode_name(Mode m) {
  return m == Mode::RiskAgnostic ? "risk_agnostic" : "trusted_only";
}

struct SinrSchedule {
  std::vector<double> zeta_db;
  std::vector<double> zeta_linear;

  int rounds() const { return static_cast<int>(zeta_linear.size()); }
};

/// Threshold ramp: descend from start_db by step_db per round, clamp at
/// end_db, hold there for any remaining rounds.
inline SinrSchedule make_schedule(double start_db, double end_db, double step_db,
                                  int rounds) {
  if (rounds < 1)
    throw std::invalid_argument("make_schedule: rounds must be >= 1");
  if (!(start_db >= end_db))
    throw std::invalid_argument("make_schedule: start_db must be >= end_db");
  if (!(step_db > 0.0))
    throw std::invalid_argument("make_schedule: step_db must be > 0");
  SinrSchedule sched;
  sched.zeta_db.reserve(rounds);
  sched.zeta_linear.reserve(rounds);
  for (int t = 0; t < rounds; ++t) {
    const double db = std::max(end_db, start_db - step_db * t);
    sched.zeta_db.push_back(db);
    sched.zeta_linear.push_back(channel::db_to_linear(db));
  }
  return sched;
}

struct RoundRecord {
  int t = 0;
  double zeta_db = 0.0;
  Mode mode = Mode::RiskAgnostic;
  std::vector<int> participants;
  std::vector<int> successes;
  // Aligned with participants; +inf marks a client whose success probability
  // fell below the debias floor (it cannot contribute at this threshold).
  std::vector<double> weights;
  double train_objective = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrustWindowState {
  int mu = 5;
  std::vector<double> history;  // recorded accuracies, oldest first
  bool transitioned = false;
};

/// True iff the new accuracy is strictly below every one of the mu most
/// recently recorded accuracies; never true while fewer than mu rounds of
/// history exist. Ties do not trigger.
inline bool trust_window_check(const TrustWindowState& state, double new_accuracy) {
  if (state.mu < 1)
    throw std::invalid_argument("trust_window_check: mu must be >= 1");
  if (state.history.size() < static_cast<std::size_t>(state.mu)) return false;
  for (std::size_t i = state.history.size() - state.mu; i < state.history.size(); ++i)
    if (!(new_accuracy < state.history[i])) return false;
  return true;
}

struct Upload {
  int client = 0;
  const std::vector<double>* w = nullptr;
  bool success = false;
  double weight = 1.0;  // 1/S at this round's threshold; ignored unless success
};

/// Debiased global update:
///   g' = g + (1/U') Σ_n 1{success_n} · weight_n · (w_n - g),
/// failed uploads contributing zero. U' is the normalizer supplied by the
/// caller (participant count by default; successful-receiver count in the
/// alternate normalization).
inline std::vector<double> aggregate(const std::vector<double>& global,
                                     const std::vector<Upload>& uploads,
                                     std::size_t u_prime) {
  if (u_prime == 0)
    throw std::invalid_argument("aggregate: normalizer U' must be positive");
  std::vector<double> delta(global.size(), 0.0);
  for (const Upload& up : uploads) {
    if (!up.success) continue;
    if (up.w == nullptr || up.w->size() != global.size())
      throw std::invalid_argument("aggregate: upload weight vector mismatch");
    const double coef = up.weight / static_cast<double>(u_prime);
    const std::vector<double>& w = *up.w;
    for (std::size_t k = 0; k < delta.size(); ++k)
      delta[k] += coef * (w[k] - global[k]);
  }
  std::vector<double> out = global;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += delta[k];
  return out;
}

enum class Normalize { Participants, Received };

struct ExperimentSettings {
  geometry::GeometryConfig geometry;  // its seed field is overridden by `seed`
  channel::ChannelParams channel;
  trust::TrustConfig trust;           // its seed field is overridden by `seed`
  learning::TrainConfig train;

  int mlp_hidden = 0;  // 0 = multinomial logistic regression

  std::string dataset = "synthetic";  // "synthetic" | "mnist"
  std::string mnist_dir;
  learning::SyntheticConfig synthetic;  // its seed field is overridden by `seed`
  double validation_fraction = 0.2;
  learning::PartitionMode partition = learning::PartitionMode::IID;
  double dirichlet_alpha = 0.5;

  double zeta_start_db = 10.0;
  double zeta_end_db = 0.0;
  double zeta_step_db = 0.25;
  int rounds = 150;

  int trust_window_mu = 5;
  Normalize normalize = Normalize::Participants;
  double debias_floor = 1e-12;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const {
    geometry.validate();
    channel.validate();
    trust.validate();
    train.validate();
    if (mlp_hidden < 0)
      throw std::invalid_argument("ExperimentSettings: mlp_hidden must be >= 0");
    if (dataset != "synthetic" && dataset != "mnist")
      throw std::invalid_argument("ExperimentSettings: dataset must be 'synthetic' or 'mnist'");
    if (dataset == "mnist" && mnist_dir.empty())
      throw std::invalid_argument("ExperimentSettings: mnist_dir required when dataset is 'mnist'");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw std::invalid_argument("ExperimentSettings: validation_fraction must be in (0, 1)");
    if (partition == learning::PartitionMode::Dirichlet && !(dirichlet_alpha > 0.0))
      throw std::invalid_argument("ExperimentSettings: dirichlet_alpha must be > 0");
    if (rounds < 1)
      throw std::invalid_argument("ExperimentSettings: rounds must be >= 1");
    if (!(zeta_start_db >= zeta_end_db))
      throw std::invalid_argument("ExperimentSettings: zeta_start_db must be >= zeta_end_db");
    if (!(zeta_step_db > 0.0))
      throw std::invalid_argument("ExperimentSettings: zeta_step_db must be > 0");
    if (trust_window_mu < 1)
      throw std::invalid_argument("ExperimentSettings: trust_window_mu must be >= 1");
    if (!(debias_floor > 0.0))
      throw std::invalid_argument("ExperimentSettings: debias_floor must be > 0");
    if (threads < 1)
      throw std::invalid_argument("ExperimentSettings: threads must be >= 1");
  }
};

/// Everything derived from the settings exactly once: topology, radio links,
/// trust scores, shards, schedule, initial weights. Cases A/B/C run against
/// the same plan so their comparison shares every source of randomness.
struct ExperimentPlan {
  ExperimentSettings settings;
  geometry::NetworkTopology topology;
  channel::TestCellLinks links;
  std::vector<double> trust_scores;
  trust::Partition trust_partition;
  learning::Dataset data;
  std::vector<std::size_t> train_pool;
  std::vector<std::size_t> val_pool;
  std::vector<learning::Shard> shards;
  learning::ModelLayout layout;
  std::vector<double> init_weights;
  SinrSchedule schedule;

  int n_clients() const { return topology.n_test_users; }
};

inline ExperimentPlan build_plan(const ExperimentSettings& settings_in) {
  ExperimentSettings settings = settings_in;
  settings.validate();

  ExperimentPlan plan;
  plan.settings = settings;

  geometry::GeometryConfig geo = settings.geometry;
  geo.seed = settings.seed;
  plan.topology = geometry::generate_topology(geo);
  plan.links = channel::make_links(plan.topology, settings.channel);

  trust::TrustConfig tc = settings.trust;
  tc.seed = settings.seed;
  plan.trust_scores = trust::sample_scores(tc, plan.topology.n_test_users);
  plan.trust_partition = trust::categorize(plan.trust_scores, tc.rho, tc.kappa);

  if (settings.dataset == "mnist") {
    plan.data = learning::load_idx_pair(settings.mnist_dir + "/train-images-idx3-ubyte",
                                        settings.mnist_dir + "/train-labels-idx1-ubyte");
  } else {
    learning::SyntheticConfig sc = settings.synthetic;
    sc.seed = settings.seed;
    plan.data = learning::make_synthetic(sc);
  }
  plan.data.validate();

  auto [train_pool, val_pool] =
      learning::split_validation(plan.data.size(), settings.validation_fraction, settings.seed);
  plan.train_pool = std::move(train_pool);
  plan.val_pool = std::move(val_pool);
  plan.shards = learning::partition(plan.data, plan.train_pool,
                                    static_cast<std::size_t>(plan.topology.n_test_users),
                                    settings.partition, settings.dirichlet_alpha,
                                    settings.seed);

  plan.layout = learning::ModelLayout{plan.data.dim, plan.data.n_classes, settings.mlp_hidden};
  rng::Rng init_gen = rng::substream(settings.seed, "init");
  plan.init_weights = learning::init_weights(plan.layout, init_gen);

  plan.schedule = make_schedule(settings.zeta_start_db, settings.zeta_end_db,
                                settings.zeta_step_db, settings.rounds);
  return plan;
}

/// Attack applied to a risky client's weights at upload time.
using AttackFn =
    std::function<std::vector<double>(const std::vector<double>&, double omega)>;

inline AttackFn default_attack() {
  return [](const std::vector<double>& w, double omega) {
    return trust::manipulate_weights(w, omega);
  };
}

struct ExperimentState {
  Case experiment_case = Case::A_RiskAware;
  Mode mode = Mode::RiskAgnostic;
  std::vector<double> global;
  TrustWindowState window;
};

inline ExperimentState init_state(const ExperimentPlan& plan, Case c) {
  ExperimentState state;
  state.experiment_case = c;
  state.mode = (c == Case::C_Conservative) ? Mode::TrustedOnly : Mode::RiskAgnostic;
  state.global = plan.init_weights;
  state.window.mu = plan.settings.trust_window_mu;
  return state;
}

namespace detail {

inline std::vector<int> eligible_clients(const ExperimentPlan& plan, Mode mode) {
  std::vector<int> ids;
  for (int n = 0; n < plan.n_clients(); ++n) {
    const trust::Category cat = plan.trust_partition.category[n];
    if (cat == trust::Category::Malicious) continue;
    if (cat == trust::Category::Risky && mode == Mode::TrustedOnly) continue;
    ids.push_back(n);
  }
  return ids;
}

// Local training for every participant; clients own independent RNG streams
// keyed (seed, round, client), so any thread count yields identical results.
inline std::vector<std::vector<double>> train_participants(
    const ExperimentPlan& plan, const std::vector<double>& global,
    const std::vector<int>& participants, int t) {
  std::vector<std::vector<double>> out(participants.size());
  const int threads =
      std::min<int>(plan.settings.threads, static_cast<int>(participants.size()));
  const auto train_one = [&](std::size_t i) {
    const int n = participants[i];
    rng::Rng gen = rng::substream(plan.settings.seed, "train",
                                  {static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(n)});
    out[i] = learning::local_train(plan.layout, global, plan.data, plan.shards[n],
                                   plan.settings.train, gen);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < participants.size(); ++i) train_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= participants.size()) return;
        train_one(i);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

// Mean over clients of their shard's cross-entropy at w: the server-side
// global objective (every client counts, participating or not).
inline double global_objective(const ExperimentPlan& plan, const std::vector<double>& w) {
  double total = 0.0;
  for (const auto& shard : plan.shards)
    total += learning::batch_loss(plan.layout, w, plan.data, shard.indices);
  return total / static_cast<double>(plan.shards.size());
}

}  // namespace detail

/// One round of the algorithm: select participants by mode, train locally,
/// apply the risky-client manipulation, draw the channel, aggregate the
/// debiased successful uploads, evaluate, and (risk-aware case only) advance
/// the trust-window transition check.
inline RoundRecord run_round(const ExperimentPlan& plan, ExperimentState& state,
                             int t, channel::SuccessCache& cache,
                             const AttackFn& attack) {
  if (t < 0 || t >= plan.schedule.rounds())
    throw std::invalid_argument("run_round: round index out of schedule range");
  const double zeta = plan.schedule.zeta_linear[t];

  RoundRecord rec;
  rec.t = t;
  rec.zeta_db = plan.schedule.zeta_db[t];
  rec.mode = state.mode;
  rec.participants = detail::eligible_clients(plan, state.mode);

  std::vector<std::vector<double>> local =
      detail::train_participants(plan, state.global, rec.participants, t);

  for (std::size_t i = 0; i < rec.participants.size(); ++i) {
    const int n = rec.participants[i];
    if (plan.trust_partition.category[n] == trust::Category::Risky)
      local[i] = attack(local[i], plan.trust_scores[n]);
  }

  // The fading stream covers every test-cell user each round regardless of
  // who participates, so case/mode never shifts the draws.
  rng::Rng fading = rng::substream(plan.settings.seed, "fading",
                                   {static_cast<std::uint64_t>(t)});
  const channel::SinrRealization sinr =
      channel::draw_sinr(plan.links, plan.settings.channel, zeta, fading);

  std::vector<Upload> uploads;
  uploads.reserve(rec.participants.size());
  for (std::size_t i = 0; i < rec.participants.size(); ++i) {
    const int n = rec.participants[i];
    Upload up;
    up.client = n;
    up.w = &local[i];
    up.success = sinr.success[n] != 0;
    double weight = std::numeric_limits<double>::infinity();
    try {
      weight = cache.weight(zeta, plan.links.serving_r[n], plan.settings.debias_floor);
    } catch (const channel::ChannelError&) {
      if (up.success) throw;  // success from an "unreachable" client: do not mask
    }
    up.weight = weight;
    rec.weights.push_back(weight);
    if (up.success) rec.successes.push_back(n);
    uploads.push_back(up);
  }

  const std::size_t u_prime = plan.settings.normalize == Normalize::Participants
                                  ? rec.participants.size()
                                  : rec.successes.size();
  // A zero normalizer means nothing can be aggregated this round — no
  // eligible participant (e.g. the conservative case when the trust draw
  // produced no fully trusted client), or no successful receiver under the
  // alternate normalization. The global model holds.
  if (u_prime > 0) state.global = aggregate(state.global, uploads, u_prime);

  const learning::EvalResult eval =
      learning::evaluate(plan.layout, state.global, plan.data, plan.val_pool);
  rec.loss = eval.loss;
  rec.accuracy = eval.accuracy;
  rec.train_objective = detail::global_objective(plan, state.global);

  if (state.experiment_case == Case::A_RiskAware && state.mode == Mode::RiskAgnostic) {
    if (trust_window_check(state.window, eval.accuracy)) {
      state.mode = Mode::TrustedOnly;
      state.window.transitioned = true;
    }
    state.window.history.push_back(eval.accuracy);
  }
  return rec;
}

inline std::vector<RoundRecord> run_experiment_on(
    const ExperimentPlan& plan, Case c,
    channel::SuccessCache* shared_cache = nullptr,
    const AttackFn& attack = default_attack()) {
  ExperimentState state = init_state(plan, c);
  channel::SuccessCache local_cache(plan.settings.channel);
  channel::SuccessCache& cache = shared_cache ? *shared_cache : local_cache;
  std::vector<RoundRecord> records;
  records.reserve(plan.schedule.rounds());
  for (int t = 0; t < plan.schedule.rounds(); ++t)
    records.push_back(run_round(plan, state, t, cache, attack));
  return records;
}

inline std::vector<RoundRecord> run_experiment(const ExperimentSettings& settings,
                                               Case c) {
  const ExperimentPlan plan = build_plan(settings);
  return run_experiment_on(plan, c);
}

struct CaseRuns {
  ExperimentPlan plan;
  std::vector<RoundRecord> case_a;
  std::vector<RoundRecord> case_b;
  std::vector<RoundRecord> case_c;
};

/// All three benchmark cases against one shared plan (same seed, topology,
/// data, trust draws), so the curves are directly comparable.
inline CaseRuns compare_cases(const ExperimentSettings& settings) {
  CaseRuns runs;
  runs.plan = build_plan(settings);
  channel::SuccessCache cache(settings.channel);
  runs.case_a = run_experiment_on(runs.plan, Case::A_RiskAware, &cache);
  runs.case_b = run_experiment_on(runs.plan, Case::B_RiskAgnostic, &cache);
  runs.case_c = run_experiment_on(runs.plan, Case::C_Conservative, &cache);
  return runs;
}

}  // namespace fedcell::orchestrator
