#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedcell/model.hpp"
#include "fedcell/rng.hpp"

namespace fedcell::learning {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw DatasetError("IDX file truncated while reading header: " + path);
  return (static_cast<std::uint32_t>(bytes[0]) << 24) |
         (static_cast<std::uint32_t>(bytes[1]) << 16) |
         (static_cast<std::uint32_t>(bytes[2]) << 8) |
         static_cast<std::uint32_t>(bytes[3]);
}

}  // namespace detail

/// Parses one IDX image file and its label companion (standard MNIST
/// layout): big-endian magic 0x00000803 for images, 0x00000801 for labels.
/// Pixels are scaled to [0, 1].
inline Dataset load_idx_pair(const std::string& images_path,
                             const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DatasetError("cannot open IDX image file: " + images_path);
  const std::uint32_t img_magic = detail::read_be_u32(img, images_path);
  if (img_magic != 0x00000803u)
    throw DatasetError("bad IDX image magic in " + images_path + " (got " +
                       std::to_string(img_magic) + ", want 2051)");
  const std::uint32_t n_images = detail::read_be_u32(img, images_path);
  const std::uint32_t rows = detail::read_be_u32(img, images_path);
  const std::uint32_t cols = detail::read_be_u32(img, images_path);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DatasetError("cannot open IDX label file: " + labels_path);
  const std::uint32_t lab_magic = detail::read_be_u32(lab, labels_path);
  if (lab_magic != 0x00000801u)
    throw DatasetError("bad IDX label magic in " + labels_path + " (got " +
                       std::to_string(lab_magic) + ", want 2049)");
  const std::uint32_t n_labels = detail::read_be_u32(lab, labels_path);
  if (n_images != n_labels)
    throw DatasetError("IDX image/label count mismatch: " +
                       std::to_string(n_images) + " images vs " +
                       std::to_string(n_labels) + " labels");

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(n_images) * dim);
  if (!img.read(reinterpret_cast<char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size())))
    throw DatasetError("IDX image file truncated: " + images_path);
  std::vector<unsigned char> raw_labels(n_labels);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()),
                static_cast<std::streamsize>(raw_labels.size())))
    throw DatasetError("IDX label file truncated: " + labels_path);

  Dataset data;
  data.dim = static_cast<int>(dim);
  data.features.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i)
    data.features[i] = static_cast<double>(pixels[i]) / 255.0;
  data.labels.reserve(n_labels);
  int max_label = 0;
  for (unsigned char l : raw_labels) {
    data.labels.push_back(static_cast<int>(l));
    max_label = std::max(max_label, static_cast<int>(l));
  }
  data.n_classes = max_label + 1;
  data.validate();
  return data;
}

struct SyntheticConfig {
  std::size_t n = 5000;
  int dim = 16;
  int n_classes = 10;
  double class_sep = 1.0;  // std of the class-center cloud
  double noise = 1.0;      // within-class std
  std::uint64_t seed = 0;
};

/// Gaussian blobs: class centers drawn N(0, class_sep² I), examples drawn
/// center + N(0, noise² I), labels balanced round-robin. Overlap (and hence
/// the Bayes error) is controlled by class_sep / noise.
inline Dataset make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n < 1 || cfg.dim < 1 || cfg.n_classes < 2)
    throw std::invalid_argument("make_synthetic: need n >= 1, dim >= 1, classes >= 2");
  if (!(cfg.class_sep >= 0.0) || !(cfg.noise >= 0.0))
    throw std::invalid_argument("make_synthetic: class_sep and noise must be >= 0");
  rng::Rng gen = rng::substream(cfg.seed, "dataset");
  std::vector<double> centers(static_cast<std::size_t>(cfg.n_classes) * cfg.dim);
  for (double& v : centers) v = cfg.class_sep * gen.normal();
  Dataset data;
  data.dim = cfg.dim;
  data.n_classes = cfg.n_classes;
  data.features.resize(cfg.n * static_cast<std::size_t>(cfg.dim));
  data.labels.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const int y = static_cast<int>(i % cfg.n_classes);
    data.labels[i] = y;
    const double* mu = centers.data() + static_cast<std::size_t>(y) * cfg.dim;
    double* x = data.features.data() + i * cfg.dim;
    for (int j = 0; j < cfg.dim; ++j) x[j] = mu[j] + cfg.noise * gen.normal();
  }
  return data;
}

/// Deterministic shuffle-split into train/validation index pools.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_validation(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_validation: fraction must be in (0, 1)");
  if (n < 2)
    throw std::invalid_argument("split_validation: need at least 2 examples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng::Rng gen = rng::substream(seed, "split");
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = gen.uniform_int(i + 1);
    std::swap(order[i], order[j]);
  }
  std::size_t n_val = static_cast<std::size_t>(fraction * static_cast<double>(n));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train(order.begin() + n_val, order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(val)};
}

enum class PartitionMode { IID, Dirichlet };

struct Shard {
  std::size_t owner = 0;
  std::vector<std::size_t> indices;
};

/// Splits a training pool across clients. IID: shuffled even chunks.
/// Dirichlet: each client draws class proportions from Dirichlet(alpha,...,
/// alpha) and every class's examples are dealt out proportionally (largest
/// remainder). Shards are disjoint and every client receives at least one
/// example (rebalanced from the largest shard if a draw starves someone).
inline std::vector<Shard> partition(const Dataset& data,
                                    const std::vector<std::size_t>& pool,
                                    std::size_t n_clients, PartitionMode mode,
                                    double dirichlet_alpha, std::uint64_t seed) {
  if (n_clients < 1)
    throw std::invalid_argument("partition: need at least one client");
  if (pool.size() < n_clients)
    throw std::invalid_argument(
        "partition: infeasible, more clients (" + std::to_string(n_clients) +
        ") than examples (" + std::to_string(pool.size()) + ")");
  rng::Rng gen = rng::substream(seed, "partition");

  std::vector<Shard> shards(n_clients);
  for (std::size_t c = 0; c < n_clients; ++c) shards[c].owner = c;

  if (mode == PartitionMode::IID) {
    std::vector<std::size_t> order = pool;
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = gen.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }
    const std::size_t base = order.size() / n_clients;
    const std::size_t rem = order.size() % n_clients;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < n_clients; ++c) {
      const std::size_t take = base + (c < rem ? 1 : 0);
      shards[c].indices.assign(order.begin() + pos, order.begin() + pos + take);
      pos += take;
    }
    return shards;
  }

  if (!(dirichlet_alpha > 0.0))
    throw std::invalid_argument("partition: dirichlet_alpha must be > 0");
  // Per-client class proportions: normalized Gamma(alpha) draws.
  std::vector<std::vector<double>> weight(n_clients,
                                          std::vector<double>(data.n_classes));
  for (std::size_t c = 0; c < n_clients; ++c)
    for (int k = 0; k < data.n_classes; ++k)
      weight[c][k] = gen.gamma(dirichlet_alpha);

  std::vector<std::vector<std::size_t>> by_class(data.n_classes);
  for (std::size_t idx : pool) by_class[data.labels[idx]].push_back(idx);
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = gen.uniform_int(i);
      std::swap(members[i - 1], members[j]);
    }
  }

  for (int k = 0; k < data.n_classes; ++k) {
    const auto& members = by_class[k];
    if (members.empty()) continue;
    double total_w = 0.0;
    for (std::size_t c = 0; c < n_clients; ++c) total_w += weight[c][k];
    // Largest-remainder apportionment of this class across clients.
    std::vector<std::size_t> counts(n_clients);
    std::vector<std::pair<double, std::size_t>> fractional;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < n_clients; ++c) {
      const double exact = members.size() * weight[c][k] / total_w;
      counts[c] = static_cast<std::size_t>(exact);
      assigned += counts[c];
      fractional.push_back({exact - static_cast<double>(counts[c]), c});
    }
    std::sort(fractional.begin(), fractional.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    for (std::size_t i = 0; assigned < members.size(); ++i, ++assigned)
      ++counts[fractional[i % n_clients].second];
    std::size_t pos = 0;
    for (std::size_t c = 0; c < n_clients; ++c) {
      shards[c].indices.insert(shards[c].indices.end(), members.begin() + pos,
                               members.begin() + pos + counts[c]);
      pos += counts[c];
    }
  }

  // No client may be left empty: move one example at a time from the
  // currently largest shard.
  for (std::size_t c = 0; c < n_clients; ++c) {
    while (shards[c].indices.empty()) {
      std::size_t donor = 0;
      for (std::size_t d = 1; d < n_clients; ++d)
        if (shards[d].indices.size() > shards[donor].indices.size()) donor = d;
      if (shards[donor].indices.size() <= 1)
        throw std::invalid_argument("partition: infeasible, cannot give every client an example");
      shards[c].indices.push_back(shards[donor].indices.back());
      shards[donor].indices.pop_back();
    }
  }
  for (auto& s : shards) std::sort(s.indices.begin(), s.indices.end());
  return shards;
}

}  // namespace fedcell::learning
