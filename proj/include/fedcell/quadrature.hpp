#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedcell::quad {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (positive half; symmetric).
inline constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};

inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};

// Embedded 7-point Gauss weights, matching odd-index Kronrod nodes.
inline constexpr double kGaussW[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct PanelResult {
  double integral = 0.0;
  double error = 0.0;
};

template <typename F>
PanelResult gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = f(center);

  double kronrod = kKronrodW[7] * f_center;
  double gauss = kGaussW[3] * f_center;
  for (int i = 0; i < 7; ++i) {
    const double offset = half * kNodes[i];
    const double sum = f(center - offset) + f(center + offset);
    kronrod += kKronrodW[i] * sum;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;

  PanelResult out;
  out.integral = kronrod;
  // Standard conservative scaling of the Gauss/Kronrod discrepancy.
  const double diff = std::abs(kronrod - gauss);
  out.error = std::pow(200.0 * diff, 1.5);
  if (out.error > diff) out.error = diff;
  if (out.error < 1e-300) out.error = diff;
  return out;
}

struct Panel {
  double a;
  double b;
  double integral;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace detail

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_panels = 4096;
};

struct Result {
  double integral = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

/// Adaptive Gauss-Kronrod integration over consecutive [breakpoints[i],
/// breakpoints[i+1]] intervals. Splits the worst panel until the summed
/// error estimate meets max(abs_tol, rel_tol * |integral|). Throws
/// QuadratureError if the panel budget runs out first.
template <typename F>
Result integrate(const F& f, const std::vector<double>& breakpoints,
                 const Options& opt = {}) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("integrate: need at least two breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("integrate: breakpoints must be strictly increasing");
  }

  std::priority_queue<detail::Panel> panels;
  double total = 0.0;
  double total_error = 0.0;
  std::size_t n_panels = 0;

  auto push_panel = [&](double a, double b) {
    const detail::PanelResult r = detail::gk15(f, a, b);
    panels.push({a, b, r.integral, r.error});
    total += r.integral;
    total_error += r.error;
    ++n_panels;
  };

  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    push_panel(breakpoints[i - 1], breakpoints[i]);

  while (total_error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (n_panels >= opt.max_panels)
      throw QuadratureError(
          "integrate: panel budget exhausted (" + std::to_string(opt.max_panels) +
          " panels) before reaching tolerance; residual error " +
          std::to_string(total_error));
    const detail::Panel worst = panels.top();
    panels.pop();
    total -= worst.integral;
    total_error -= worst.error;
    --n_panels;
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw QuadratureError("integrate: interval too small to split further");
    push_panel(worst.a, mid);
    push_panel(mid, worst.b);
  }

  Result out;
  out.error = total_error;
  out.panels = n_panels;
  // Re-sum in ascending-interval order so the result does not depend on the
  // heap's internal layout.
  std::vector<detail::Panel> flat;
  flat.reserve(n_panels);
  while (!panels.empty()) {
    flat.push_back(panels.top());
    panels.pop();
  }
  std::sort(flat.begin(), flat.end(),
            [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
  double sum = 0.0;
  for (const auto& p : flat) sum += p.integral;
  out.integral = sum;
  return out;
}

/// Geometric ladder of breakpoints covering [0, hi]: 0, lo, lo*ratio, ... hi.
inline std::vector<double> geometric_breakpoints(double lo, double hi,
                                                 double ratio = 4.0) {
  if (!(lo > 0.0) || !(hi > lo) || !(ratio > 1.0))
    throw std::invalid_argument("geometric_breakpoints: need 0 < lo < hi, ratio > 1");
  std::vector<double> pts;
  pts.push_back(0.0);
  double x = lo;
  while (x < hi) {
    pts.push_back(x);
    x *= ratio;
  }
  pts.push_back(hi);
  return pts;
}

}  // namespace fedcell::quad
