#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fedcell/dataset.hpp"
#include "fedcell/model.hpp"
#include "fedcell/rng.hpp"

namespace fedcell::learning {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.5;
  int local_epochs = 1;
  int batch_size = 32;

  void validate() const {
    // learning_rate 0 is allowed: it makes local_train the identity, which
    // is a useful degenerate configuration.
    if (!(learning_rate >= 0.0))
      throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw std::invalid_argument("TrainConfig: momentum must be in [0, 1)");
    if (local_epochs < 1)
      throw std::invalid_argument("TrainConfig: local_epochs must be >= 1");
    if (batch_size < 1)
      throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  }
};

namespace detail {

inline void check_finite(const std::vector<double>& w) {
  for (double v : w)
    if (!std::isfinite(v))
      throw LearningError(
          "local_train: weights diverged to a non-finite value (reduce the "
          "learning rate)");
}

}  // namespace detail

/// Local client update: starts from the broadcast global weights and runs
/// `local_epochs` of shuffled mini-batch momentum SGD on the shard's mean
/// cross-entropy, ψ ← ψ - γ(m·v + ∇f). Bit-identical for identical inputs
/// and RNG state.
inline std::vector<double> local_train(const ModelLayout& layout,
                                       const std::vector<double>& global_w,
                                       const Dataset& data, const Shard& shard,
                                       const TrainConfig& cfg, rng::Rng& gen) {
  layout.validate();
  cfg.validate();
  if (shard.indices.empty())
    throw std::invalid_argument("local_train: shard must be non-empty");
  if (global_w.size() != layout.size())
    throw std::invalid_argument("local_train: weight size does not match layout");

  std::vector<double> w = global_w;
  std::vector<double> velocity(w.size(), 0.0);
  std::vector<std::size_t> order = shard.indices;
  std::vector<std::size_t> batch;

  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = gen.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.assign(order.begin() + start, order.begin() + stop);
      const std::vector<double> grad = compute_gradient(layout, w, data, batch);
      for (std::size_t k = 0; k < w.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] + grad[k];
        w[k] -= cfg.learning_rate * velocity[k];
      }
      detail::check_finite(w);
    }
  }
  return w;
}

}  // namespace fedcell::learning
