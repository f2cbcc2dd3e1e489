#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fedcell/rng.hpp"

using fedcell::rng::derive_seed;
using fedcell::rng::Rng;
using fedcell::rng::substream;

TEST_CASE("derive_seed is deterministic and label-sensitive") {
  CHECK(derive_seed(42, "topology") == derive_seed(42, "topology"));
  CHECK(derive_seed(42, "topology") != derive_seed(43, "topology"));
  CHECK(derive_seed(42, "topology") != derive_seed(42, "fading"));
  CHECK(derive_seed(42, "train", {3, 7}) == derive_seed(42, "train", {3, 7}));
  CHECK(derive_seed(42, "train", {3, 7}) != derive_seed(42, "train", {7, 3}));
  CHECK(derive_seed(42, "train", {3}) != derive_seed(42, "train", {3, 0}));
}

TEST_CASE("substreams with equal keys replay identical sequences") {
  Rng a = substream(99, "fading", {5});
  Rng b = substream(99, "fading", {5});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng gen(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = gen.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_int covers its range and stays in bounds") {
  Rng gen(7);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t v = gen.uniform_int(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  // Expected 10000 per bucket; 5-sigma band is about +/- 474.
  for (int c : counts) CHECK(std::abs(c - 10000) < 600);
  CHECK_THROWS_AS(gen.uniform_int(0), std::invalid_argument);
}

TEST_CASE("exponential draws have unit mean") {
  Rng gen(11);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = gen.exponential();
    REQUIRE(x >= 0.0);
    sum += x;
  }
  CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("normal draws match N(0,1) moments") {
  Rng gen(13);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = gen.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.02));
  CHECK_THAT(sum_sq / n, Catch::Matchers::WithinAbs(1.0, 0.05));
}

TEST_CASE("poisson matches mean and variance at small mean") {
  Rng gen(17);
  const double mean = 3.0;
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(gen.poisson(mean));
    sum += k;
    sum_sq += k * k;
  }
  const double m = sum / n;
  const double var = sum_sq / n - m * m;
  CHECK_THAT(m, Catch::Matchers::WithinAbs(3.0, 0.03));
  CHECK_THAT(var, Catch::Matchers::WithinAbs(3.0, 0.1));
}

TEST_CASE("poisson handles large means via chunking") {
  Rng gen(19);
  const double mean = 5000.0;
  const int n = 2000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(gen.poisson(mean));
    sum += k;
    sum_sq += k * k;
  }
  const double m = sum / n;
  const double var = sum_sq / n - m * m;
  CHECK_THAT(m, Catch::Matchers::WithinAbs(5000.0, 10.0));    // ~6 sigma
  CHECK_THAT(var, Catch::Matchers::WithinRel(5000.0, 0.15));  // Poisson var = mean
  CHECK_THROWS_AS(gen.poisson(-1.0), std::invalid_argument);
}

TEST_CASE("gamma draws match their mean for both sampler branches") {
  Rng gen(23);
  const int n = 100000;
  for (double shape : {0.5, 1.0, 4.5}) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = gen.gamma(shape);
      REQUIRE(x >= 0.0);
      sum += x;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(shape, 0.05 * std::max(1.0, shape)));
  }
  CHECK_THROWS_AS(gen.gamma(0.0), std::invalid_argument);
}

TEST_CASE("beta(1,1) is uniform by Kolmogorov-Smirnov") {
  Rng gen(29);
  const int n = 10000;
  std::vector<double> draws(n);
  for (double& d : draws) d = gen.beta(1.0, 1.0);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ecdf_hi = static_cast<double>(i + 1) / n;
    const double ecdf_lo = static_cast<double>(i) / n;
    ks = std::max({ks, std::abs(ecdf_hi - draws[i]), std::abs(draws[i] - ecdf_lo)});
  }
  // 1% critical value for the one-sample KS statistic: 1.63 / sqrt(n).
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("beta moments and bounds") {
  Rng gen(31);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = gen.beta(3.0, 1.0);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.75, 0.01));
  CHECK_THROWS_AS(gen.beta(0.0, 1.0), std::invalid_argument);
}
