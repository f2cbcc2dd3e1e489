#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fedcell/rng.hpp"

namespace fedcell::trust {

enum class Category { FullyTrusted, Risky, Malicious };

inline const char* category_name(Category c) {
  switch (c) {
    case Category::FullyTrusted: return "fully_trusted";
    case Category::Risky: return "risky";
    case Category::Malicious: return "malicious";
  }
  return "?";
}

struct TrustConfig {
  double alpha = 3.0;
  double beta = 1.0;
  double rho = 0.9;    // at or above: fully trusted
  double kappa = 0.3;  // at or below: malicious
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0))
      throw std::invalid_argument("TrustConfig: alpha and beta must be > 0");
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::invalid_argument("TrustConfig: rho must be in (0, 1]");
    if (!(kappa >= 0.0 && kappa < 1.0))
      throw std::invalid_argument("TrustConfig: kappa must be in [0, 1)");
    if (!(kappa < rho))
      throw std::invalid_argument("TrustConfig: kappa must be < rho");
  }
};

/// n independent Beta(alpha, beta) trustworthiness scores, fixed for the
/// whole experiment (scores model prior history, not online behavior).
inline std::vector<double> sample_scores(const TrustConfig& cfg, std::size_t n) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("sample_scores: n must be >= 1");
  rng::Rng gen = rng::substream(cfg.seed, "trust");
  std::vector<double> scores;
  scores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) scores.push_back(gen.beta(cfg.alpha, cfg.beta));
  return scores;
}

inline Category categorize_one(double omega, double rho, double kappa) {
  if (omega >= rho) return Category::FullyTrusted;
  if (omega <= kappa) return Category::Malicious;
  return Category::Risky;
}

struct Partition {
  std::vector<std::size_t> fully_trusted;
  std::vector<std::size_t> risky;
  std::vector<std::size_t> malicious;
  std::vector<Category> category;  // per client, same order as scores
};

/// Threshold partition: Ω ≥ ρ fully trusted, Ω ≤ κ malicious, strictly
/// between risky. Exhaustive and disjoint by construction.
inline Partition categorize(const std::vector<double>& scores, double rho,
                            double kappa) {
  if (!(kappa < rho))
    throw std::invalid_argument("categorize: kappa must be < rho");
  Partition out;
  out.category.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Category c = categorize_one(scores[i], rho, kappa);
    out.category.push_back(c);
    switch (c) {
      case Category::FullyTrusted: out.fully_trusted.push_back(i); break;
      case Category::Risky: out.risky.push_back(i); break;
      case Category::Malicious: out.malicious.push_back(i); break;
    }
  }
  return out;
}

/// Covert weight manipulation a risky client applies before upload:
/// w' = w · (1 + (1 - Ω)/10). Identity at Ω = 1; deviation grows as the
/// score drops.
inline std::vector<double> manipulate_weights(const std::vector<double>& w,
                                              double omega) {
  if (!(omega >= 0.0 && omega <= 1.0))
    throw std::invalid_argument("manipulate_weights: omega must be in [0, 1]");
  const double factor = 1.0 + (1.0 - omega) / 10.0;
  std::vector<double> out;
  out.reserve(w.size());
  for (double v : w) out.push_back(v * factor);
  return out;
}

}  // namespace fedcell::trust
