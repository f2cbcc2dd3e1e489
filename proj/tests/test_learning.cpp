#include "fedcell/learning.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fedcell/dataset.hpp"
#include "fedcell/model.hpp"
#include "fedcell/rng.hpp"
#include "support/oracles.hpp"

using namespace fedcell::learning;
using fedcell::rng::Rng;
using fedcell::rng::substream;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

namespace oracles = fedcell::test_oracles;

SyntheticConfig small_synth(std::uint64_t seed, std::size_t n = 400) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.dim = 6;
  cfg.n_classes = 4;
  cfg.class_sep = 2.0;
  cfg.noise = 1.0;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::size_t> iota_batch(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void write_be_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

struct IdxFixture {
  std::filesystem::path images;
  std::filesystem::path labels;

  IdxFixture(std::uint32_t img_magic, std::uint32_t n_images,
             std::uint32_t lab_magic, std::uint32_t n_labels,
             bool truncate_pixels = false, bool truncate_labels = false) {
    const auto dir = std::filesystem::temp_directory_path();
    static int counter = 0;
    images = dir / ("fedcell_test_images_" + std::to_string(counter) + ".idx");
    labels = dir / ("fedcell_test_labels_" + std::to_string(counter) + ".idx");
    ++counter;

    std::ofstream img(images, std::ios::binary);
    write_be_u32(img, img_magic);
    write_be_u32(img, n_images);
    write_be_u32(img, 2);  // rows
    write_be_u32(img, 2);  // cols
    std::uint32_t n_pixels = n_images * 4 - (truncate_pixels ? 3 : 0);
    for (std::uint32_t i = 0; i < n_pixels; ++i) {
      const unsigned char px = static_cast<unsigned char>((i * 17) % 256);
      img.write(reinterpret_cast<const char*>(&px), 1);
    }
    img.close();

    std::ofstream lab(labels, std::ios::binary);
    write_be_u32(lab, lab_magic);
    write_be_u32(lab, n_labels);
    std::uint32_t n_bytes = n_labels - (truncate_labels ? 1 : 0);
    for (std::uint32_t i = 0; i < n_bytes; ++i) {
      const unsigned char y = static_cast<unsigned char>(i % 3);
      lab.write(reinterpret_cast<const char*>(&y), 1);
    }
  }

  ~IdxFixture() {
    std::error_code ec;
    std::filesystem::remove(images, ec);
    std::filesystem::remove(labels, ec);
  }
};

}  // namespace

TEST_CASE("ModelLayout: flat sizes") {
  ModelLayout logistic{16, 10, 0};
  CHECK(logistic.size() == 16 * 10 + 10);
  ModelLayout mlp{16, 10, 8};
  CHECK(mlp.size() == 16 * 8 + 8 + 8 * 10 + 10);
  ModelLayout bad{0, 10, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {16, 1, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("init_weights: fan-in bounds and zero biases") {
  ModelLayout mlp{12, 5, 7};
  Rng g1 = substream(3, "init");
  Rng g2 = substream(3, "init");
  const auto w = init_weights(mlp, g1);
  CHECK(w == init_weights(mlp, g2));
  REQUIRE(w.size() == mlp.size());

  const double b1 = 1.0 / std::sqrt(12.0);
  for (std::size_t k = 0; k < 12 * 7; ++k) {
    CHECK(w[k] >= -b1);
    CHECK(w[k] <= b1);
  }
  for (std::size_t k = 12 * 7; k < 12 * 7 + 7; ++k) CHECK(w[k] == 0.0);
  const std::size_t w2 = 12 * 7 + 7;
  const double b2 = 1.0 / std::sqrt(7.0);
  for (std::size_t k = w2; k < w2 + 7 * 5; ++k) {
    CHECK(w[k] >= -b2);
    CHECK(w[k] <= b2);
  }
  for (std::size_t k = w2 + 7 * 5; k < w.size(); ++k) CHECK(w[k] == 0.0);
}

TEST_CASE("make_synthetic: determinism and balanced labels") {
  const auto a = make_synthetic(small_synth(11));
  const auto b = make_synthetic(small_synth(11));
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK_NOTHROW(a.validate());
  CHECK(a.size() == 400);
  CHECK(a.dim == 6);

  std::vector<int> counts(a.n_classes, 0);
  for (int y : a.labels) ++counts[y];
  for (int c : counts) CHECK(c == 100);

  const auto other = make_synthetic(small_synth(12));
  CHECK(other.features != a.features);

  SyntheticConfig bad = small_synth(1);
  bad.n_classes = 1;
  CHECK_THROWS_AS(make_synthetic(bad), std::invalid_argument);
  bad = small_synth(1);
  bad.noise = -1.0;
  CHECK_THROWS_AS(make_synthetic(bad), std::invalid_argument);
}

TEST_CASE("load_idx_pair: parses a well-formed pair") {
  IdxFixture fx(0x803, 6, 0x801, 6);
  const Dataset data = load_idx_pair(fx.images.string(), fx.labels.string());
  CHECK(data.dim == 4);
  CHECK(data.size() == 6);
  CHECK(data.n_classes == 3);  // labels cycle 0,1,2
  CHECK(data.labels[0] == 0);
  CHECK(data.labels[4] == 1);
  // Pixel i holds (i*17) % 256, scaled by 1/255.
  CHECK_THAT(data.features[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(data.features[1], WithinRel(17.0 / 255.0, 1e-15));
  CHECK_THAT(data.features[23], WithinRel(((23 * 17) % 256) / 255.0, 1e-15));
}

TEST_CASE("load_idx_pair: rejects malformed files") {
  {
    IdxFixture fx(0x123, 4, 0x801, 4);  // wrong image magic
    CHECK_THROWS_AS(load_idx_pair(fx.images.string(), fx.labels.string()),
                    DatasetError);
  }
  {
    IdxFixture fx(0x803, 4, 0x777, 4);  // wrong label magic
    CHECK_THROWS_AS(load_idx_pair(fx.images.string(), fx.labels.string()),
                    DatasetError);
  }
  {
    IdxFixture fx(0x803, 4, 0x801, 5);  // count mismatch
    CHECK_THROWS_AS(load_idx_pair(fx.images.string(), fx.labels.string()),
                    DatasetError);
  }
  {
    IdxFixture fx(0x803, 4, 0x801, 4, /*truncate_pixels=*/true);
    CHECK_THROWS_AS(load_idx_pair(fx.images.string(), fx.labels.string()),
                    DatasetError);
  }
  {
    IdxFixture fx(0x803, 4, 0x801, 4, false, /*truncate_labels=*/true);
    CHECK_THROWS_AS(load_idx_pair(fx.images.string(), fx.labels.string()),
                    DatasetError);
  }
  CHECK_THROWS_AS(load_idx_pair("/nonexistent/images", "/nonexistent/labels"),
                  DatasetError);
}

TEST_CASE("split_validation: disjoint, complete, deterministic") {
  const auto [train, val] = split_validation(1000, 0.2, 42);
  CHECK(train.size() == 800);
  CHECK(val.size() == 200);

  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(val.begin(), val.end());
  CHECK(all.size() == 1000);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 999);

  const auto [train2, val2] = split_validation(1000, 0.2, 42);
  CHECK(train == train2);
  CHECK(val == val2);
  const auto [train3, val3] = split_validation(1000, 0.2, 43);
  CHECK(val != val3);

  // The validation side never rounds down to zero.
  const auto [t_small, v_small] = split_validation(3, 0.01, 1);
  CHECK(v_small.size() == 1);
  CHECK(t_small.size() == 2);

  CHECK_THROWS_AS(split_validation(100, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_validation(100, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_validation(1, 0.2, 1), std::invalid_argument);
}

TEST_CASE("partition: IID equal chunks") {
  const auto data = make_synthetic(small_synth(5, 1000));
  const auto pool = iota_batch(1000);
  const auto shards = partition(data, pool, 10, PartitionMode::IID, 0.5, 7);
  REQUIRE(shards.size() == 10);

  std::set<std::size_t> seen;
  for (std::size_t c = 0; c < shards.size(); ++c) {
    CHECK(shards[c].owner == c);
    CHECK(shards[c].indices.size() == 100);
    seen.insert(shards[c].indices.begin(), shards[c].indices.end());
  }
  CHECK(seen.size() == 1000);

  // Uneven pool: remainder examples go to the first shards.
  const auto pool2 = iota_batch(1003);
  const auto data2 = make_synthetic(small_synth(5, 1003));
  const auto shards2 = partition(data2, pool2, 10, PartitionMode::IID, 0.5, 7);
  std::size_t total = 0;
  for (std::size_t c = 0; c < 10; ++c) {
    CHECK(shards2[c].indices.size() == (c < 3 ? 101 : 100));
    total += shards2[c].indices.size();
  }
  CHECK(total == 1003);

  CHECK(partition(data, pool, 10, PartitionMode::IID, 0.5, 7)[3].indices ==
        shards[3].indices);
  CHECK_THROWS_AS(partition(data, iota_batch(5), 10, PartitionMode::IID, 0.5, 7),
                  std::invalid_argument);
}

TEST_CASE("partition: Dirichlet concentration limit is uniform") {
  // With alpha -> infinity every client's class mix approaches the global
  // mix; total variation distance per shard stays under 0.05.
  SyntheticConfig cfg = small_synth(9, 20000);
  cfg.n_classes = 10;
  const auto data = make_synthetic(cfg);
  const auto pool = iota_batch(data.size());
  const auto shards = partition(data, pool, 10, PartitionMode::Dirichlet, 1e4, 3);

  for (const auto& shard : shards) {
    REQUIRE(shard.indices.size() > 0);
    std::vector<double> mix(data.n_classes, 0.0);
    for (std::size_t idx : shard.indices) mix[data.labels[idx]] += 1.0;
    double tv = 0.0;
    for (int k = 0; k < data.n_classes; ++k)
      tv += std::abs(mix[k] / shard.indices.size() - 0.1);
    tv /= 2.0;
    CHECK(tv < 0.05);
  }
}

TEST_CASE("partition: skewed Dirichlet still covers every client") {
  const auto data = make_synthetic(small_synth(13, 500));
  const auto pool = iota_batch(500);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto shards = partition(data, pool, 37, PartitionMode::Dirichlet, 0.05, seed);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& shard : shards) {
      CHECK(shard.indices.size() >= 1);
      total += shard.indices.size();
      seen.insert(shard.indices.begin(), shard.indices.end());
    }
    CHECK(total == 500);
    CHECK(seen.size() == 500);  // disjoint cover
  }
  CHECK_THROWS_AS(partition(data, pool, 5, PartitionMode::Dirichlet, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("compute_gradient: matches an independent analytic oracle") {
  const auto data = make_synthetic(small_synth(21));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(21, "init");
  const auto w = init_weights(layout, gen);
  const auto batch = iota_batch(64);

  const auto fast = compute_gradient(layout, w, data, batch);
  const auto slow = oracles::naive_logistic_gradient(layout, w, data, batch);
  REQUIRE(fast.size() == slow.size());
  for (std::size_t k = 0; k < fast.size(); ++k)
    CHECK_THAT(fast[k], WithinAbs(slow[k], 1e-12 * std::max(1.0, std::abs(slow[k]))));
}

TEST_CASE("compute_gradient: central finite differences, both model shapes") {
  const auto data = make_synthetic(small_synth(22));
  for (int hidden : {0, 5}) {
    ModelLayout layout{data.dim, data.n_classes, hidden};
    Rng gen = substream(40 + hidden, "init");
    const auto w = init_weights(layout, gen);

    Rng pick = substream(50 + hidden, "train");
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<std::size_t> batch;
      for (int i = 0; i < 16; ++i)
        batch.push_back(pick.uniform_int(data.size()));
      const auto analytic = compute_gradient(layout, w, data, batch);
      const auto fd = oracles::finite_diff_gradient(layout, w, data, batch);
      for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double rel = std::abs(analytic[k] - fd[k]) /
                           std::max(std::abs(analytic[k]), 1e-3);
        CHECK(rel <= 1e-4);
      }
    }
  }
}

TEST_CASE("compute_gradient: balanced batch at zero weights has zero bias gradient") {
  const auto data = make_synthetic(small_synth(23, 400));
  ModelLayout layout{data.dim, data.n_classes, 0};
  const std::vector<double> w(layout.size(), 0.0);
  // One example of each of the 4 classes: labels cycle 0,1,2,3.
  const std::vector<std::size_t> batch = {0, 1, 2, 3};
  const auto grad = compute_gradient(layout, w, data, batch);
  for (int k = 0; k < layout.n_classes; ++k)
    CHECK(grad[static_cast<std::size_t>(layout.input_dim) * layout.n_classes + k] == 0.0);
}

TEST_CASE("compute_gradient: duplicated batch leaves the mean unchanged") {
  const auto data = make_synthetic(small_synth(24));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(24, "init");
  const auto w = init_weights(layout, gen);
  const std::vector<std::size_t> batch = {5, 9, 11};
  const std::vector<std::size_t> doubled = {5, 9, 11, 5, 9, 11};
  const auto a = compute_gradient(layout, w, data, batch);
  const auto b = compute_gradient(layout, w, data, doubled);
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK_THAT(b[k], WithinAbs(a[k], 1e-14 * std::max(1.0, std::abs(a[k]))));
}

TEST_CASE("batch_loss: matches the naive formulation; ln(C) at zero weights") {
  const auto data = make_synthetic(small_synth(25));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(25, "init");
  const auto w = init_weights(layout, gen);
  const auto batch = iota_batch(50);
  CHECK_THAT(batch_loss(layout, w, data, batch),
             WithinRel(oracles::naive_batch_loss(layout, w, data, batch), 1e-12));

  const std::vector<double> zero(layout.size(), 0.0);
  CHECK_THAT(batch_loss(layout, zero, data, batch),
             WithinAbs(std::log(4.0), 1e-12));
  CHECK_THROWS_AS(batch_loss(layout, zero, data, {}), std::invalid_argument);
}

TEST_CASE("evaluate: chance level, tie-break rule, and loss") {
  const auto data = make_synthetic(small_synth(26, 1000));
  ModelLayout layout{data.dim, data.n_classes, 0};
  const std::vector<double> zero(layout.size(), 0.0);
  const auto idx = iota_batch(1000);

  // All-equal logits predict class 0 everywhere; labels are balanced, so
  // accuracy is exactly 1/C and loss exactly ln(C).
  const EvalResult at_zero = evaluate(layout, zero, data, idx);
  CHECK(at_zero.accuracy == 0.25);
  CHECK_THAT(at_zero.loss, WithinAbs(std::log(4.0), 1e-12));

  // A deliberate tie between classes 0 and 1 resolves to the lower index.
  std::vector<double> tie(layout.size(), 0.0);
  tie[static_cast<std::size_t>(layout.input_dim) * layout.n_classes + 0] = 1.0;
  tie[static_cast<std::size_t>(layout.input_dim) * layout.n_classes + 1] = 1.0;
  const EvalResult tied = evaluate(layout, tie, data, {0, 1});  // labels 0 and 1
  CHECK(tied.accuracy == 0.5);

  // Random init stays near chance on balanced data.
  Rng gen = substream(26, "init");
  const auto w = init_weights(layout, gen);
  const EvalResult rough = evaluate(layout, w, data, idx);
  CHECK_THAT(rough.accuracy, WithinAbs(0.25, 0.1));

  CHECK_THROWS_AS(evaluate(layout, zero, data, {}), std::invalid_argument);
}

TEST_CASE("local_train: zero learning rate is the identity") {
  const auto data = make_synthetic(small_synth(30));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(30, "init");
  const auto w = init_weights(layout, gen);

  Shard shard{0, iota_batch(100)};
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.local_epochs = 3;
  Rng train_gen = substream(30, "train", {0, 0});
  CHECK(local_train(layout, w, data, shard, cfg, train_gen) == w);
}

TEST_CASE("local_train: single full-batch step matches the hand-rolled oracle") {
  const auto data = make_synthetic(small_synth(31));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(31, "init");
  const auto w = init_weights(layout, gen);

  Shard shard{0, iota_batch(64)};
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.momentum = 0.0;
  cfg.local_epochs = 1;
  cfg.batch_size = 64;  // one batch covers the shard: shuffle order is moot
  Rng train_gen = substream(31, "train", {0, 0});
  const auto stepped = local_train(layout, w, data, shard, cfg, train_gen);
  const auto expect = oracles::naive_single_step(layout, w, data, shard.indices, 0.05);
  REQUIRE(stepped.size() == expect.size());
  for (std::size_t k = 0; k < stepped.size(); ++k)
    CHECK_THAT(stepped[k], WithinAbs(expect[k], 1e-12 * std::max(1.0, std::abs(expect[k]))));
}

TEST_CASE("local_train: momentum folds the previous velocity into step two") {
  const auto data = make_synthetic(small_synth(32));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(32, "init");
  const auto w0 = init_weights(layout, gen);

  Shard shard{0, iota_batch(48)};
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.5;
  cfg.local_epochs = 2;
  cfg.batch_size = 48;  // full batch per epoch
  Rng train_gen = substream(32, "train", {0, 0});
  const auto got = local_train(layout, w0, data, shard, cfg, train_gen);

  // By hand: v1 = g(w0), w1 = w0 - γ v1; v2 = m v1 + g(w1), w2 = w1 - γ v2.
  const auto g1 = oracles::naive_logistic_gradient(layout, w0, data, shard.indices);
  std::vector<double> w1(w0.size());
  for (std::size_t k = 0; k < w0.size(); ++k) w1[k] = w0[k] - 0.1 * g1[k];
  const auto g2 = oracles::naive_logistic_gradient(layout, w1, data, shard.indices);
  std::vector<double> w2(w0.size());
  for (std::size_t k = 0; k < w0.size(); ++k)
    w2[k] = w1[k] - 0.1 * (0.5 * g1[k] + g2[k]);

  for (std::size_t k = 0; k < got.size(); ++k)
    CHECK_THAT(got[k], WithinAbs(w2[k], 1e-12 * std::max(1.0, std::abs(w2[k]))));
}

TEST_CASE("local_train: deterministic replay and loss decrease") {
  const auto data = make_synthetic(small_synth(33, 600));
  ModelLayout layout{data.dim, data.n_classes, 0};
  Rng gen = substream(33, "init");
  const auto w = init_weights(layout, gen);
  Shard shard{0, iota_batch(600)};

  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.momentum = 0.5;
  cfg.local_epochs = 2;
  cfg.batch_size = 32;
  Rng g1 = substream(33, "train", {4, 2});
  Rng g2 = substream(33, "train", {4, 2});
  const auto a = local_train(layout, w, data, shard, cfg, g1);
  const auto b = local_train(layout, w, data, shard, cfg, g2);
  CHECK(a == b);

  CHECK(batch_loss(layout, a, data, shard.indices) <
        batch_loss(layout, w, data, shard.indices));

  // Epoch-by-epoch descent: the running loss drops in at least 90% of 50
  // epochs of mini-batch SGD.
  std::vector<double> weights = w;
  double prev = batch_loss(layout, weights, data, shard.indices);
  int drops = 0;
  Rng g3 = substream(33, "train", {5, 0});
  TrainConfig one = cfg;
  one.local_epochs = 1;
  for (int epoch = 0; epoch < 50; ++epoch) {
    weights = local_train(layout, weights, data, shard, one, g3);
    const double now = batch_loss(layout, weights, data, shard.indices);
    if (now < prev) ++drops;
    prev = now;
  }
  CHECK(drops >= 45);
}

TEST_CASE("local_train: overfits a tiny shard to perfect accuracy") {
  SyntheticConfig scfg = small_synth(34, 20);
  scfg.class_sep = 3.0;
  scfg.noise = 0.3;
  const auto data = make_synthetic(scfg);
  ModelLayout layout{data.dim, data.n_classes, 0};
  std::vector<double> w(layout.size(), 0.0);
  Shard shard{0, iota_batch(20)};

  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.momentum = 0.5;
  cfg.local_epochs = 1;
  cfg.batch_size = 20;
  Rng gen = substream(34, "train", {0, 0});
  double loss = batch_loss(layout, w, data, shard.indices);
  for (int epoch = 0; epoch < 2000 && loss >= 0.01; ++epoch) {
    w = local_train(layout, w, data, shard, cfg, gen);
    loss = batch_loss(layout, w, data, shard.indices);
  }
  REQUIRE(loss < 0.01);
  CHECK(evaluate(layout, w, data, shard.indices).accuracy == 1.0);
}

TEST_CASE("local_train: divergence raises LearningError") {
  // All-ones features against weights at the double ceiling overflow the
  // logits immediately.
  Dataset data;
  data.dim = 3;
  data.n_classes = 2;
  data.features = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  data.labels = {0, 1};
  ModelLayout layout{3, 2, 0};
  std::vector<double> huge(layout.size(), 1e308);
  Shard shard{0, {0, 1}};
  TrainConfig cfg;
  Rng gen = substream(35, "train", {0, 0});
  CHECK_THROWS_AS(local_train(layout, huge, data, shard, cfg, gen), LearningError);

  // An absurd learning rate walks ordinary weights off to overflow too.
  const auto blobs = make_synthetic(small_synth(36, 32));
  ModelLayout layout2{blobs.dim, blobs.n_classes, 0};
  Rng gen2 = substream(36, "init");
  const auto w0 = init_weights(layout2, gen2);
  TrainConfig wild;
  wild.learning_rate = 1e307;
  wild.local_epochs = 200;
  wild.batch_size = 8;
  Shard shard2{0, iota_batch(32)};
  Rng gen3 = substream(36, "train", {0, 0});
  CHECK_THROWS_AS(local_train(layout2, w0, blobs, shard2, wild, gen3), LearningError);
}

TEST_CASE("local_train: argument validation") {
  const auto data = make_synthetic(small_synth(37));
  ModelLayout layout{data.dim, data.n_classes, 0};
  std::vector<double> w(layout.size(), 0.0);
  TrainConfig cfg;
  Rng gen = substream(37, "train", {0, 0});

  Shard empty{0, {}};
  CHECK_THROWS_AS(local_train(layout, w, data, empty, cfg, gen), std::invalid_argument);
  Shard ok{0, {0, 1}};
  std::vector<double> short_w(layout.size() - 1, 0.0);
  CHECK_THROWS_AS(local_train(layout, short_w, data, ok, cfg, gen), std::invalid_argument);

  TrainConfig bad = cfg;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.learning_rate = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.local_epochs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
