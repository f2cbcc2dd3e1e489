#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fedcell/rng.hpp"

namespace fedcell::learning {

class LearningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  int dim = 0;
  int n_classes = 0;
  std::vector<double> features;  // size() x dim, row-major
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * dim; }

  void validate() const {
    if (dim < 1 || n_classes < 2)
      throw std::invalid_argument("Dataset: need dim >= 1 and n_classes >= 2");
    if (features.size() != labels.size() * static_cast<std::size_t>(dim))
      throw std::invalid_argument("Dataset: feature/label size mismatch");
    for (int y : labels)
      if (y < 0 || y >= n_classes)
        throw std::invalid_argument("Dataset: label out of range");
  }
};

/// Flat-vector model: multinomial logistic regression (hidden = 0) or a
/// one-hidden-layer tanh MLP. The orchestrator only ever sees the flat
/// vector; the layout gives it a size and nothing else.
struct ModelLayout {
  int input_dim = 0;
  int n_classes = 0;
  int hidden = 0;  // 0 selects plain logistic regression

  std::size_t size() const {
    if (hidden == 0)
      return static_cast<std::size_t>(input_dim) * n_classes + n_classes;
    return static_cast<std::size_t>(input_dim) * hidden + hidden +
           static_cast<std::size_t>(hidden) * n_classes + n_classes;
  }

  void validate() const {
    if (input_dim < 1 || n_classes < 2 || hidden < 0)
      throw std::invalid_argument("ModelLayout: invalid dimensions");
  }
};

/// Symmetric uniform fan-in init for weight matrices, zero biases.
inline std::vector<double> init_weights(const ModelLayout& layout, rng::Rng& gen) {
  layout.validate();
  std::vector<double> w(layout.size(), 0.0);
  const auto fill = [&](std::size_t offset, int rows, int cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    for (std::size_t k = 0; k < static_cast<std::size_t>(rows) * cols; ++k)
      w[offset + k] = gen.uniform(-bound, bound);
  };
  if (layout.hidden == 0) {
    fill(0, layout.input_dim, layout.n_classes);
  } else {
    fill(0, layout.input_dim, layout.hidden);
    const std::size_t w2_off =
        static_cast<std::size_t>(layout.input_dim) * layout.hidden + layout.hidden;
    fill(w2_off, layout.hidden, layout.n_classes);
  }
  return w;
}

namespace detail {

// Logits for one example; for the MLP also captures tanh activations.
inline void forward(const ModelLayout& m, const std::vector<double>& w,
                    const double* x, std::vector<double>& hidden_act,
                    std::vector<double>& logits) {
  const int d = m.input_dim, c = m.n_classes, h = m.hidden;
  logits.assign(c, 0.0);
  if (h == 0) {
    const double* bias = w.data() + static_cast<std::size_t>(d) * c;
    for (int k = 0; k < c; ++k) logits[k] = bias[k];
    for (int i = 0; i < d; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* row = w.data() + static_cast<std::size_t>(i) * c;
      for (int k = 0; k < c; ++k) logits[k] += xi * row[k];
    }
    return;
  }
  hidden_act.assign(h, 0.0);
  const double* b1 = w.data() + static_cast<std::size_t>(d) * h;
  for (int j = 0; j < h; ++j) hidden_act[j] = b1[j];
  for (int i = 0; i < d; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = w.data() + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) hidden_act[j] += xi * row[j];
  }
  for (int j = 0; j < h; ++j) hidden_act[j] = std::tanh(hidden_act[j]);
  const std::size_t w2_off = static_cast<std::size_t>(d) * h + h;
  const double* b2 = w.data() + w2_off + static_cast<std::size_t>(h) * c;
  for (int k = 0; k < c; ++k) logits[k] = b2[k];
  for (int j = 0; j < h; ++j) {
    const double hj = hidden_act[j];
    const double* row = w.data() + w2_off + static_cast<std::size_t>(j) * c;
    for (int k = 0; k < c; ++k) logits[k] += hj * row[k];
  }
}

// log(sum(exp(z))) with the max factored out.
inline double log_sum_exp(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

}  // namespace detail

/// Mean cross-entropy gradient over a batch of example indices. The exact
/// analytic gradient: softmax minus one-hot, backpropagated through the
///(optional) tanh layer.
inline std::vector<double> compute_gradient(const ModelLayout& m,
                                            const std::vector<double>& w,
                                            const Dataset& data,
                                            const std::vector<std::size_t>& batch) {
  m.validate();
  if (batch.empty())
    throw std::invalid_argument("compute_gradient: batch must be non-empty");
  if (w.size() != m.size())
    throw std::invalid_argument("compute_gradient: weight size mismatch");
  const int d = m.input_dim, c = m.n_classes, h = m.hidden;
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> hidden_act, logits, dz(c), dh;
  for (std::size_t idx : batch) {
    const double* x = data.row(idx);
    const int y = data.labels[idx];
    detail::forward(m, w, x, hidden_act, logits);
    const double lse = detail::log_sum_exp(logits);
    for (int k = 0; k < c; ++k) dz[k] = std::exp(logits[k] - lse);
    dz[y] -= 1.0;
    if (h == 0) {
      for (int i = 0; i < d; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        double* row = grad.data() + static_cast<std::size_t>(i) * c;
        for (int k = 0; k < c; ++k) row[k] += xi * dz[k];
      }
      double* db = grad.data() + static_cast<std::size_t>(d) * c;
      for (int k = 0; k < c; ++k) db[k] += dz[k];
    } else {
      const std::size_t w2_off = static_cast<std::size_t>(d) * h + h;
      dh.assign(h, 0.0);
      for (int j = 0; j < h; ++j) {
        const double* row = w.data() + w2_off + static_cast<std::size_t>(j) * c;
        double acc = 0.0;
        for (int k = 0; k < c; ++k) acc += row[k] * dz[k];
        dh[j] = acc * (1.0 - hidden_act[j] * hidden_act[j]);
      }
      for (int i = 0; i < d; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        double* row = grad.data() + static_cast<std::size_t>(i) * h;
        for (int j = 0; j < h; ++j) row[j] += xi * dh[j];
      }
      double* db1 = grad.data() + static_cast<std::size_t>(d) * h;
      for (int j = 0; j < h; ++j) db1[j] += dh[j];
      double* gw2 = grad.data() + w2_off;
      for (int j = 0; j < h; ++j) {
        const double hj = hidden_act[j];
        double* row = gw2 + static_cast<std::size_t>(j) * c;
        for (int k = 0; k < c; ++k) row[k] += hj * dz[k];
      }
      double* db2 = grad.data() + w2_off + static_cast<std::size_t>(h) * c;
      for (int k = 0; k < c; ++k) db2[k] += dz[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

/// Mean cross-entropy over the given examples.
inline double batch_loss(const ModelLayout& m, const std::vector<double>& w,
                         const Dataset& data,
                         const std::vector<std::size_t>& batch) {
  if (batch.empty())
    throw std::invalid_argument("batch_loss: batch must be non-empty");
  std::vector<double> hidden_act, logits;
  double total = 0.0;
  for (std::size_t idx : batch) {
    detail::forward(m, w, data.row(idx), hidden_act, logits);
    total += detail::log_sum_exp(logits) - logits[data.labels[idx]];
  }
  return total / static_cast<double>(batch.size());
}

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and top-1 accuracy (argmax ties resolved toward the
/// lowest class index).
inline EvalResult evaluate(const ModelLayout& m, const std::vector<double>& w,
                           const Dataset& data,
                           const std::vector<std::size_t>& indices) {
  if (indices.empty())
    throw std::invalid_argument("evaluate: validation set must be non-empty");
  std::vector<double> hidden_act, logits;
  double total_loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t idx : indices) {
    detail::forward(m, w, data.row(idx), hidden_act, logits);
    total_loss += detail::log_sum_exp(logits) - logits[data.labels[idx]];
    int best = 0;
    for (int k = 1; k < m.n_classes; ++k)
      if (logits[k] > logits[best]) best = k;
    if (best == data.labels[idx]) ++correct;
  }
  EvalResult out;
  out.loss = total_loss / static_cast<double>(indices.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
  return out;
}

}  // namespace fedcell::learning
