#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedcell/geometry.hpp"
#include "fedcell/quadrature.hpp"
#include "fedcell/rng.hpp"

namespace fedcell::channel {

class ChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

struct ChannelParams {
  double tx_power_w = 0.01;   // 10 dBm
  double noise_w = 1e-13;     // -100 dBm
  double path_loss_eta = 4.0;
  double bs_density = 50e-6;  // per square meter

  void validate() const {
    if (!(tx_power_w > 0.0))
      throw std::invalid_argument("ChannelParams: tx_power_w must be > 0");
    if (!(noise_w >= 0.0))
      throw std::invalid_argument("ChannelParams: noise_w must be >= 0");
    if (!(path_loss_eta > 2.0))
      throw std::invalid_argument(
          "ChannelParams: path_loss_eta must be > 2 (the interference "
          "integral diverges otherwise)");
    if (!(bs_density > 0.0))
      throw std::invalid_argument("ChannelParams: bs_density must be > 0");
  }
};

/// Laplace transform of the aggregate uplink interference at the test BS:
///   L(s) = exp(-2πλ ∫_0^∞ (1 - e^{-πλr²}) / (1 + r^η/(sP)) · r dr).
/// Substituting u = r² halves the exponent and gives
///   L(s) = exp(-πλ J),  J = ∫_0^∞ (1 - e^{-πλu}) / (1 + u^{η/2}/(sP)) du.
/// J is integrated adaptively; the tail beyond the truncation point is
/// bounded by the sP·u^{-η/2} envelope and kept below 2.5e-9, matching the
/// 2.5e-9 quadrature tolerance (total absolute error ≤ 5e-9 on J, i.e.
/// ≤ 2.5e-9 on the original r-integral).
inline double laplace_interference(double s, const ChannelParams& params) {
  params.validate();
  if (!(s >= 0.0))
    throw std::invalid_argument("laplace_interference: s must be >= 0");
  if (s == 0.0) return 1.0;

  const double lambda = params.bs_density;
  const double sp = s * params.tx_power_w;       // = ζ·r^η when s = ζ r^η / P
  const double p = params.path_loss_eta / 2.0;   // exponent in the u = r² domain

  constexpr double kTailTol = 2.5e-9;
  const double log_hi = std::log(2.0 * sp / (kTailTol * (p - 1.0))) / (p - 1.0);
  if (log_hi > 700.0)
    throw quad::QuadratureError(
        "laplace_interference: tail truncation infeasible (path_loss_eta too "
        "close to 2)");

  const double u_exp = 1.0 / (M_PI * lambda);    // knee of the 1-e^{-πλu} factor
  const double u_lor = std::pow(sp, 1.0 / p);    // knee of the denominator
  const double hi = std::max(std::exp(log_hi), 4.0 * std::max(u_exp, u_lor));
  const double lo = std::min({u_exp, u_lor, hi}) / 4096.0;

  const auto integrand = [=](double u) {
    return -std::expm1(-M_PI * lambda * u) / (1.0 + std::pow(u, p) / sp);
  };
  quad::Options opt;
  opt.abs_tol = kTailTol;
  opt.rel_tol = 1e-13;
  opt.max_panels = 4096;
  const quad::Result res =
      quad::integrate(integrand, quad::geometric_breakpoints(lo, hi), opt);

  const double exponent = M_PI * lambda * std::max(res.integral, 0.0);
  return std::exp(-exponent);
}

/// Probability that a test-cell user at distance r clears the SINR threshold
/// zeta (linear): S = exp(-ζ N0 / (P r^{-η})) · L(ζ / (P r^{-η})). Exact for
/// unit-mean exponential signal fading.
inline double success_probability(double zeta, double r, const ChannelParams& params) {
  params.validate();
  if (!(r > 0.0))
    throw std::domain_error("success_probability: r must be > 0");
  if (!(zeta >= 0.0))
    throw std::invalid_argument("success_probability: zeta must be >= 0");
  if (zeta == 0.0) return 1.0;
  const double inv_mean_signal = std::pow(r, params.path_loss_eta) / params.tx_power_w;
  const double s = zeta * inv_mean_signal;
  return std::exp(-s * params.noise_w) * laplace_interference(s, params);
}

/// Aggregation amplification 1/S. Throws when S underflows the floor: the
/// client cannot realistically deliver an update at this threshold and a
/// reciprocal weight would be meaningless.
inline double debias_weight(double zeta, double r, const ChannelParams& params,
                            double floor = 1e-12) {
  const double s_prob = success_probability(zeta, r, params);
  if (s_prob < floor)
    throw ChannelError(
        "debias_weight: success probability " + std::to_string(s_prob) +
        " below floor " + std::to_string(floor) +
        " (client unreachable at this threshold)");
  return 1.0 / s_prob;
}

/// Memoizes success probabilities per (zeta, r); each schedule threshold and
/// client distance pair is integrated once per run. Not thread-safe; the
/// orchestrator computes weights on a single thread.
class SuccessCache {
 public:
  explicit SuccessCache(const ChannelParams& params) : params_(params) {
    params_.validate();
  }

  double success(double zeta, double r) {
    const auto key = std::make_pair(zeta, r);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double value = success_probability(zeta, r, params_);
    memo_.emplace(key, value);
    return value;
  }

  double weight(double zeta, double r, double floor = 1e-12) {
    const double s_prob = success(zeta, r);
    if (s_prob < floor)
      throw ChannelError(
          "SuccessCache: success probability below floor (client unreachable "
          "at this threshold)");
    return 1.0 / s_prob;
  }

  const ChannelParams& params() const { return params_; }

 private:
  ChannelParams params_;
  std::map<std::pair<double, double>, double> memo_;
};

/// Plain SINR arithmetic; +infinity when the denominator is exactly zero
/// (no noise, no interferers) and the signal is positive.
inline double sinr_value(double tx_power_w, double fading, double r, double eta,
                         double noise_w, double interference_w) {
  const double signal = tx_power_w * fading * std::pow(r, -eta);
  const double denom = noise_w + interference_w;
  if (denom <= 0.0)
    return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return signal / denom;
}

/// Radio geometry of the test cell, precomputed once per topology: serving
/// distances plus, per test user, the path attenuation d^{-η} of every
/// other-cell user sharing its RB.
struct TestCellLinks {
  std::vector<double> serving_r;
  std::vector<double> serving_atten;                 // r^{-η}
  std::vector<std::vector<double>> interferer_atten; // d^{-η} per same-RB interferer
};

inline TestCellLinks make_links(const geometry::NetworkTopology& topo,
                                const ChannelParams& params) {
  params.validate();
  TestCellLinks links;
  links.serving_r.reserve(topo.n_test_users);
  links.serving_atten.reserve(topo.n_test_users);
  links.interferer_atten.reserve(topo.n_test_users);
  for (int u = 0; u < topo.n_test_users; ++u) {
    const double r = topo.distances[u];
    if (!(r > 0.0))
      throw ChannelError("make_links: test user at zero distance from BS");
    links.serving_r.push_back(r);
    links.serving_atten.push_back(std::pow(r, -params.path_loss_eta));
    std::vector<double> atten;
    for (double d : geometry::interferer_distances(topo, topo.rb_assignment[u]))
      atten.push_back(std::pow(d, -params.path_loss_eta));
    links.interferer_atten.push_back(std::move(atten));
  }
  return links;
}

struct SinrRealization {
  double zeta = 0.0;               // linear threshold the draw was judged against
  std::vector<double> sinr;        // per test-cell user
  std::vector<char> success;       // 1 iff sinr > zeta
};

/// One fading realization for every test-cell user: fresh unit-mean
/// exponential gains on the serving link and on every same-RB interferer
/// link. Users are drawn in ascending index order, so the result is a pure
/// function of the RNG state.
inline SinrRealization draw_sinr(const TestCellLinks& links,
                                 const ChannelParams& params, double zeta,
                                 rng::Rng& gen) {
  if (!(zeta >= 0.0))
    throw std::invalid_argument("draw_sinr: zeta must be >= 0");
  SinrRealization out;
  out.zeta = zeta;
  const std::size_t n = links.serving_r.size();
  out.sinr.reserve(n);
  out.success.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double signal = params.tx_power_w * gen.exponential() * links.serving_atten[u];
    double interference = 0.0;
    for (double atten : links.interferer_atten[u])
      interference += params.tx_power_w * gen.exponential() * atten;
    const double denom = params.noise_w + interference;
    const double v = denom <= 0.0
                         ? (signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0)
                         : signal / denom;
    out.sinr.push_back(v);
    out.success.push_back(v > zeta ? 1 : 0);
  }
  return out;
}

inline SinrRealization draw_sinr(const geometry::NetworkTopology& topo,
                                 const ChannelParams& params, double zeta,
                                 rng::Rng& gen) {
  return draw_sinr(make_links(topo, params), params, zeta, gen);
}

/// Monte Carlo model of the aggregate interference at the test BS, averaged
/// over network realizations: interfering users form a point process whose
/// density at radius d is λ(1 - e^{-πλd²}) (each of the other cells
/// contributes at most one user on the RB; nearby locations are likely to
/// fall in the test cell itself and therefore carry no interferer). Sampled
/// by thinning a homogeneous disc process, truncated at
/// r_max = r_max_factor/√λ, whose neglected tail shifts the exponent of the
/// success probability by at most πλ²ζr⁴/r_max² (negligible at the default
/// factor for every regime where S is not already ≈ 0).
class InterferenceEnsemble {
 public:
  InterferenceEnsemble(const ChannelParams& params, std::size_t n_draws,
                       rng::Rng& gen, double r_max_factor = 36.0)
      : params_(params) {
    params_.validate();
    if (n_draws == 0)
      throw std::invalid_argument("InterferenceEnsemble: n_draws must be > 0");
    const double lambda = params_.bs_density;
    const double u_max = r_max_factor * r_max_factor / lambda;  // r_max² in m²
    const double mean_pts = M_PI * lambda * u_max;
    const double half_eta = params_.path_loss_eta / 2.0;
    aggregates_.reserve(n_draws);
    for (std::size_t k = 0; k < n_draws; ++k) {
      const std::uint64_t n_pts = gen.poisson(mean_pts);
      double agg = 0.0;
      for (std::uint64_t i = 0; i < n_pts; ++i) {
        const double u = u_max * gen.uniform01();  // squared radius, uniform on the disc
        if (gen.uniform01() >= -std::expm1(-M_PI * lambda * u)) continue;
        agg += params_.tx_power_w * gen.exponential() * std::pow(u, -half_eta);
      }
      aggregates_.push_back(agg);
    }
  }

  const std::vector<double>& aggregates() const { return aggregates_; }

  /// Empirical P(SINR > zeta) for a user at distance r: fresh signal fading
  /// against each stored interference realization.
  double estimate_success(double zeta, double r, rng::Rng& gen) const {
    if (!(r > 0.0))
      throw std::domain_error("estimate_success: r must be > 0");
    if (!(zeta >= 0.0))
      throw std::invalid_argument("estimate_success: zeta must be >= 0");
    const double r_eta = std::pow(r, params_.path_loss_eta);
    std::size_t hits = 0;
    for (double agg : aggregates_) {
      const double g0 = gen.exponential();
      if (params_.tx_power_w * g0 > zeta * r_eta * (params_.noise_w + agg)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(aggregates_.size());
  }

  const ChannelParams& params() const { return params_; }

 private:
  ChannelParams params_;
  std::vector<double> aggregates_;
};

/// Convenience wrapper: build a fresh ensemble and estimate one grid point.
inline double mc_success_probability(double zeta, double r,
                                     const ChannelParams& params,
                                     std::size_t n_draws, rng::Rng& gen,
                                     double r_max_factor = 36.0) {
  const InterferenceEnsemble ensemble(params, n_draws, gen, r_max_factor);
  return ensemble.estimate_success(zeta, r, gen);
}

}  // namespace fedcell::channel
