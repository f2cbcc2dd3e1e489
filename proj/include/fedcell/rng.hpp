#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

namespace fedcell::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a root seed, a stream label, and optional
/// integer indices. The derivation is pinned so run logs stay auditable:
/// absorb each label byte and each index into a splitmix64 chain.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t state = root;
  (void)splitmix64(state);
  for (char c : label) {
    state ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    (void)splitmix64(state);
  }
  for (std::uint64_t idx : indices) {
    state ^= idx;
    (void)splitmix64(state);
  }
  return splitmix64(state);
}

/// Deterministic random stream with hand-rolled samplers.
///
/// Distributions are implemented here rather than taken from <random> so a
/// given seed produces the same sequence on every platform and standard
/// library. mt19937_64 itself is bit-exact everywhere; only the std::
/// distribution adapters are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform01_open() { return 1.0 - uniform01(); }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  /// Unit-mean exponential (Rayleigh power gain).
  double exponential() { return -std::log(uniform01_open()); }

  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson count. Knuth's product method, chunked so exp(-mean) never
  /// underflows for large means.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    std::uint64_t total = 0;
    constexpr double kChunk = 400.0;
    while (mean > kChunk) {
      total += poisson_knuth(kChunk);
      mean -= kChunk;
    }
    return total + poisson_knuth(mean);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform01_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double alpha, double beta_shape) {
    if (!(alpha > 0.0) || !(beta_shape > 0.0))
      throw std::invalid_argument("beta: shape parameters must be > 0");
    const double x = gamma(alpha);
    const double y = gamma(beta_shape);
    const double s = x + y;
    if (s <= 0.0) return 0.5;
    return x / s;
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    const double threshold = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > threshold);
    return k - 1;
  }

  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

inline Rng substream(std::uint64_t root, std::string_view label,
                     std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(root, label, indices));
}

}  // namespace fedcell::rng
