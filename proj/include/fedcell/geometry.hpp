#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcell/rng.hpp"

namespace fedcell::geometry {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

struct GeometryConfig {
  double bs_density = 50e-6;        // base stations per square meter
  double area_side = 10000.0;       // meters
  int n_users_per_test_cell = 25;
  int n_rb = 30;
  double interferer_activity = 1.0; // per-RB occupancy probability in other cells
  std::uint64_t seed = 0;

  void validate() const {
    if (!(bs_density > 0.0))
      throw std::invalid_argument("GeometryConfig: bs_density must be > 0");
    if (!(area_side > 0.0))
      throw std::invalid_argument("GeometryConfig: area_side must be > 0");
    if (n_rb < 1)
      throw std::invalid_argument("GeometryConfig: n_rb must be >= 1");
    if (n_users_per_test_cell < 1)
      throw std::invalid_argument("GeometryConfig: n_users_per_test_cell must be >= 1");
    if (n_users_per_test_cell > n_rb)
      throw std::invalid_argument(
          "GeometryConfig: n_users_per_test_cell must be <= n_rb (one RB per user)");
    if (!(interferer_activity >= 0.0 && interferer_activity <= 1.0))
      throw std::invalid_argument("GeometryConfig: interferer_activity must be in [0, 1]");
  }
};

/// Immutable snapshot of one generated network. Users are stored with the
/// test-cell users first (indices [0, n_test_users)), interferers after.
struct NetworkTopology {
  std::vector<Point> bs_positions;
  int test_bs = -1;
  std::vector<Point> user_positions;
  std::vector<int> association;   // user -> serving BS index
  std::vector<double> distances;  // user -> distance to serving BS
  std::vector<int> rb_assignment; // user -> RB index
  int n_test_users = 0;
  int n_rb = 0;
  double area_side = 0.0;
  double bs_density = 0.0;
};

/// Exact nearest-BS lookup by brute force; ties go to the lowest index.
inline std::pair<int, double> nearest_bs(const Point& p,
                                         const std::vector<Point>& bs_positions) {
  if (bs_positions.empty())
    throw std::invalid_argument("nearest_bs: empty base-station list");
  int best = 0;
  double best_d2 = squared_distance(p, bs_positions[0]);
  for (int i = 1; i < static_cast<int>(bs_positions.size()); ++i) {
    const double d2 = squared_distance(p, bs_positions[i]);
    if (d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return {best, std::sqrt(best_d2)};
}

/// Uniform-grid accelerator for nearest-BS queries. Pure optimization: the
/// result (including the lowest-index tie rule) is identical to nearest_bs,
/// which the test suite checks by cross-validation.
class BsIndex {
 public:
  BsIndex(const std::vector<Point>& bs_positions, double area_side)
      : bs_(bs_positions), side_(area_side) {
    if (bs_.empty()) throw std::invalid_argument("BsIndex: empty base-station list");
    grid_n_ = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(bs_.size())))));
    cell_size_ = side_ / grid_n_;
    cells_.resize(static_cast<std::size_t>(grid_n_) * grid_n_);
    for (int i = 0; i < static_cast<int>(bs_.size()); ++i)
      cells_[cell_of(bs_[i])].push_back(i);
  }

  std::pair<int, double> query(const Point& p) const {
    const int ci = clamp_coord(p.x);
    const int cj = clamp_coord(p.y);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();

    for (int ring = 0;; ++ring) {
      // Any BS in a cell at Chebyshev ring distance `ring` is at least
      // (ring - 1) * cell_size away, so once that floor exceeds the best
      // distance no farther ring can win (or tie with a lower index at
      // exactly the bound, hence <=).
      if (best >= 0) {
        const double floor_dist = (ring - 1) * cell_size_;
        if (floor_dist > 0.0 && floor_dist * floor_dist > best_d2) break;
      }
      if (ring > 2 * grid_n_) break;  // whole grid exhausted

      scan_ring(p, ci, cj, ring, best, best_d2);
    }
    if (best < 0) {  // grid degenerate (should not happen with bs_ non-empty)
      return nearest_bs(p, bs_);
    }
    return {best, std::sqrt(best_d2)};
  }

 private:
  void scan_ring(const Point& p, int ci, int cj, int ring, int& best,
                 double& best_d2) const {
    const int lo_i = ci - ring, hi_i = ci + ring;
    const int lo_j = cj - ring, hi_j = cj + ring;
    for (int i = lo_i; i <= hi_i; ++i) {
      if (i < 0 || i >= grid_n_) continue;
      for (int j = lo_j; j <= hi_j; ++j) {
        if (j < 0 || j >= grid_n_) continue;
        if (ring > 0 && i != lo_i && i != hi_i && j != lo_j && j != hi_j)
          continue;  // interior already scanned in earlier rings
        for (int idx : cells_[static_cast<std::size_t>(i) * grid_n_ + j]) {
          const double d2 = squared_distance(p, bs_[idx]);
          if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
            best = idx;
            best_d2 = d2;
          }
        }
      }
    }
  }

  int clamp_coord(double v) const {
    const int c = static_cast<int>(std::floor((v + side_ / 2.0) / cell_size_));
    return std::clamp(c, 0, grid_n_ - 1);
  }

  std::size_t cell_of(const Point& p) const {
    return static_cast<std::size_t>(clamp_coord(p.x)) * grid_n_ + clamp_coord(p.y);
  }

  std::vector<Point> bs_;
  double side_;
  int grid_n_ = 1;
  double cell_size_ = 0.0;
  std::vector<std::vector<int>> cells_;
};

/// Generates one network realization: BS count drawn Poisson(density * area),
/// the BS nearest the area center is the test BS, exactly
/// n_users_per_test_cell users land uniformly inside the test cell, and every
/// other cell receives at most one uniformly placed user per active RB.
inline NetworkTopology generate_topology(const GeometryConfig& cfg) {
  cfg.validate();
  rng::Rng gen = rng::substream(cfg.seed, "topology");

  const double area = cfg.area_side * cfg.area_side;
  const double mean_bs = cfg.bs_density * area;

  std::uint64_t n_bs = 0;
  int retries = 0;
  for (;;) {
    n_bs = gen.poisson(mean_bs);
    if (n_bs > 0) break;
    if (++retries > 100)
      throw GeometryError(
          "generate_topology: Poisson BS count was zero after 100 retries "
          "(density * area too small)");
  }

  NetworkTopology topo;
  topo.n_rb = cfg.n_rb;
  topo.area_side = cfg.area_side;
  topo.bs_density = cfg.bs_density;
  topo.bs_positions.resize(n_bs);
  const double half = cfg.area_side / 2.0;
  for (auto& p : topo.bs_positions) {
    p.x = gen.uniform(-half, half);
    p.y = gen.uniform(-half, half);
  }

  const BsIndex index(topo.bs_positions, cfg.area_side);
  topo.test_bs = index.query(Point{0.0, 0.0}).first;

  // Test-cell users: rejection-sample the whole area so positions are uniform
  // over the (unknown-shape) Voronoi cell.
  topo.n_test_users = cfg.n_users_per_test_cell;
  const std::uint64_t user_budget = 20'000'000;
  std::uint64_t proposals = 0;
  while (static_cast<int>(topo.user_positions.size()) < cfg.n_users_per_test_cell) {
    if (++proposals > user_budget)
      throw GeometryError(
          "generate_topology: could not place test-cell users (test cell "
          "degenerately small)");
    const Point p{gen.uniform(-half, half), gen.uniform(-half, half)};
    const auto [bs, dist] = index.query(p);
    if (bs != topo.test_bs) continue;
    const int rb = static_cast<int>(topo.user_positions.size());
    topo.user_positions.push_back(p);
    topo.association.push_back(bs);
    topo.distances.push_back(dist);
    topo.rb_assignment.push_back(rb);
  }

  // Interferers: one user per active (other-cell, RB) slot, positioned
  // uniformly inside the owning cell. Shared rejection sampling: propose a
  // uniform point, hand it to its own cell's lowest unfilled active RB.
  const std::uint64_t n_cells = n_bs - 1;
  if (n_cells > 0) {
    std::vector<std::vector<int>> open_slots(n_bs);  // per BS, active RBs not yet filled
    std::uint64_t total_open = 0;
    for (std::uint64_t b = 0; b < n_bs; ++b) {
      if (static_cast<int>(b) == topo.test_bs) continue;
      for (int rb = 0; rb < cfg.n_rb; ++rb) {
        if (gen.uniform01() < cfg.interferer_activity) {
          open_slots[b].push_back(rb);
          ++total_open;
        }
      }
      // Lowest RB first; fill from the back for O(1) pops.
      std::reverse(open_slots[b].begin(), open_slots[b].end());
    }

    const std::uint64_t budget = 64 * std::max<std::uint64_t>(total_open, 1);
    std::uint64_t tries = 0;
    while (total_open > 0 && tries < budget) {
      ++tries;
      const Point p{gen.uniform(-half, half), gen.uniform(-half, half)};
      const auto [bs, dist] = index.query(p);
      if (bs == topo.test_bs) continue;
      auto& open = open_slots[bs];
      if (open.empty()) continue;
      const int rb = open.back();
      open.pop_back();
      --total_open;
      topo.user_positions.push_back(p);
      topo.association.push_back(bs);
      topo.distances.push_back(dist);
      topo.rb_assignment.push_back(rb);
    }
    // Any still-open slots simply stay empty: cells carry at most one user
    // per RB, not exactly one. Starvation only happens for cells so small
    // the proposal budget never lands in them.
  }

  return topo;
}

/// Distances from every non-test-cell user transmitting on RB `rb` to the
/// test BS (the receiver suffering the interference).
inline std::vector<double> interferer_distances(const NetworkTopology& topo, int rb) {
  if (rb < 0 || rb >= topo.n_rb)
    throw std::invalid_argument("interferer_distances: rb out of range");
  std::vector<double> out;
  const Point origin = topo.bs_positions.at(topo.test_bs);
  for (std::size_t u = 0; u < topo.user_positions.size(); ++u) {
    if (topo.association[u] == topo.test_bs) continue;
    if (topo.rb_assignment[u] != rb) continue;
    out.push_back(distance(topo.user_positions[u], origin));
  }
  return out;
}

inline nlohmann::json to_json(const NetworkTopology& topo) {
  nlohmann::json j;
  auto points = nlohmann::json::array();
  for (const auto& p : topo.bs_positions) points.push_back({p.x, p.y});
  j["bs_positions"] = std::move(points);
  auto users = nlohmann::json::array();
  for (const auto& p : topo.user_positions) users.push_back({p.x, p.y});
  j["user_positions"] = std::move(users);
  j["test_bs"] = topo.test_bs;
  j["association"] = topo.association;
  j["distances"] = topo.distances;
  j["rb_assignment"] = topo.rb_assignment;
  j["n_test_users"] = topo.n_test_users;
  j["n_rb"] = topo.n_rb;
  j["area_side"] = topo.area_side;
  j["bs_density"] = topo.bs_density;
  return j;
}

inline NetworkTopology topology_from_json(const nlohmann::json& j) {
  NetworkTopology topo;
  for (const auto& p : j.at("bs_positions"))
    topo.bs_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  for (const auto& p : j.at("user_positions"))
    topo.user_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  topo.test_bs = j.at("test_bs").get<int>();
  topo.association = j.at("association").get<std::vector<int>>();
  topo.distances = j.at("distances").get<std::vector<double>>();
  topo.rb_assignment = j.at("rb_assignment").get<std::vector<int>>();
  topo.n_test_users = j.at("n_test_users").get<int>();
  topo.n_rb = j.at("n_rb").get<int>();
  topo.area_side = j.at("area_side").get<double>();
  topo.bs_density = j.at("bs_density").get<double>();
  return topo;
}

}  // namespace fedcell::geometry
