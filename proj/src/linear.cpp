#include <cmath>
#include <numeric>

#include "math_util.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/models.hpp"

namespace vaxnet::models {
namespace {

using detail::sigmoid;
using detail::softplus;

void check_indices(const LabeledSet<BowVector>& set, std::size_t vocab_size) {
  for (const auto& x : set.samples) {
    for (const auto& e : x) {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= vocab_size) {
        throw Error("feature index " + std::to_string(e.index) + " outside vocabulary of size " +
                    std::to_string(vocab_size));
      }
    }
  }
}

double dot(const std::vector<double>& w, const BowVector& x) {
  double m = 0.0;
  for (const auto& e : x) m += w[e.index] * e.count;
  return m;
}

/// Mean loss over `idx` plus the penalty; gradients are overwritten.
double batch_loss(const LinearModel& model, const LabeledSet<BowVector>& set,
                  std::span<const std::size_t> idx, double l2, std::vector<double>* gw, double* gb) {
  if (gw) gw->assign(model.weights.size(), 0.0);
  double gbias = 0.0;
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (const auto i : idx) {
    const auto& x = set.samples[i];
    const double m = dot(model.weights, x) + model.bias;
    const int y = set.labels[i];
    double dm = 0.0;
    if (model.loss == LinearLoss::logistic) {
      loss += softplus(m) - y * m;
      dm = sigmoid(m) - y;
    } else {
      const double s = y ? 1.0 : -1.0;
      const double slack = 1.0 - s * m;
      if (slack > 0.0) {
        loss += slack;
        dm = -s;
      }
    }
    if (gw && dm != 0.0) {
      for (const auto& e : x) (*gw)[e.index] += dm * e.count * inv;
    }
    gbias += dm * inv;
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    sq += model.weights[j] * model.weights[j];
    if (gw) (*gw)[j] += l2 * model.weights[j];
  }
  if (gb) *gb = gbias;
  return loss * inv + 0.5 * l2 * sq;
}

LinearModel train_linear(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                         const TrainConfig& cfg, LinearLoss loss, TrainLog* log) {
  cfg.validate();
  if (train.empty()) throw Error("cannot train on an empty set");
  check_indices(train, vocab_size);

  LinearModel model;
  model.loss = loss;
  model.weights.assign(vocab_size, 0.0);

  Rng rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gw;
  double gb = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, order.size() - start);
      const double l = batch_loss(model, train, std::span(order).subspan(start, len), cfg.l2_penalty, &gw, &gb);
      if (!std::isfinite(l)) throw DivergenceError(static_cast<int>(epoch));
      for (std::size_t j = 0; j < vocab_size; ++j) model.weights[j] -= cfg.learning_rate * gw[j];
      model.bias -= cfg.learning_rate * gb;
      total += l;
      ++batches;
    }
    const double mean = total / static_cast<double>(batches);
    bool finite = std::isfinite(model.bias);
    for (const auto w : model.weights) finite = finite && std::isfinite(w);
    if (!std::isfinite(mean) || !finite) throw DivergenceError(static_cast<int>(epoch));
    if (log) log->epoch_loss.push_back(mean);
  }
  return model;
}

}  // namespace

double LinearModel::margin(const BowVector& x) const {
  double m = bias;
  for (const auto& e : x) {
    if (e.index < 0 || static_cast<std::size_t>(e.index) >= weights.size()) {
      throw Error("feature index outside the model vocabulary");
    }
    m += weights[e.index] * e.count;
  }
  return m;
}

double LinearModel::score(const BowVector& x) const { return sigmoid(margin(x)); }

LinearModel train_logreg(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                         const TrainConfig& cfg, TrainLog* log) {
  return train_linear(train, vocab_size, cfg, LinearLoss::logistic, log);
}

LinearModel train_linear_hinge(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                               const TrainConfig& cfg, TrainLog* log) {
  return train_linear(train, vocab_size, cfg, LinearLoss::hinge, log);
}

double linear_loss(const LinearModel& model, const LabeledSet<BowVector>& batch, double l2,
                   std::vector<double>* grad_w, double* grad_b) {
  if (batch.empty()) throw Error("linear_loss: empty batch");
  check_indices(batch, model.weights.size());
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return batch_loss(model, batch, idx, l2, grad_w, grad_b);
}

// ---------------------------------------------------------------------------

double NBModel::score(const BowVector& x) const {
  double lp[2] = {log_prior[0], log_prior[1]};
  for (const auto& e : x) {
    if (e.index < 0 || static_cast<std::size_t>(e.index) >= log_likelihood[0].size()) {
      throw Error("feature index outside the model vocabulary");
    }
    for (int c = 0; c < 2; ++c) lp[c] += e.count * log_likelihood[c][e.index];
  }
  return sigmoid(lp[1] - lp[0]);
}

NBModel train_multinomial_nb(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                             double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("naive Bayes alpha must be > 0");
  if (vocab_size == 0) throw Error("naive Bayes needs a non-empty vocabulary");
  check_indices(train, vocab_size);
  std::array<std::vector<double>, 2> counts{std::vector<double>(vocab_size, 0.0),
                                            std::vector<double>(vocab_size, 0.0)};
  std::array<double, 2> totals{0.0, 0.0};
  std::array<std::size_t, 2> docs{0, 0};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int c = train.labels[i] ? 1 : 0;
    ++docs[c];
    for (const auto& e : train.samples[i]) {
      counts[c][e.index] += e.count;
      totals[c] += e.count;
    }
  }
  if (docs[0] == 0 || docs[1] == 0) throw Error("naive Bayes needs documents of both classes");

  NBModel model;
  const double n = static_cast<double>(train.size());
  for (int c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(static_cast<double>(docs[c]) / n);
    const double denom = std::log(totals[c] + alpha * static_cast<double>(vocab_size));
    auto& ll = model.log_likelihood[c];
    ll.resize(vocab_size);
    for (std::size_t j = 0; j < vocab_size; ++j) ll[j] = std::log(counts[c][j] + alpha) - denom;
  }
  return model;
}

}  // namespace vaxnet::models
