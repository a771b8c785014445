#include <algorithm>
#include <cmath>
#include <limits>

#include "vaxnet/error.hpp"
#include "vaxnet/models.hpp"

namespace vaxnet::models {
namespace {

constexpr double kFloor = 1e-6;
constexpr double kKinkDistance = 1e-3;

// Central differences carry rounding noise of about eps_mach * |loss| / eps.
// A component where both values sit below that level is numerically zero and
// carries no relative information (an exact-zero gradient would otherwise
// score noise / kFloor).
double relative_error(double analytic, double numeric, double loss, double eps) {
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(loss)) / eps;
  if (std::abs(analytic) <= noise && std::abs(numeric) <= noise) return 0.0;
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
}

BowVector random_bow(Rng& rng, std::size_t vocab, std::uint32_t max_count) {
  BowVector x;
  for (std::size_t j = 0; j < vocab; ++j) {
    const auto c = static_cast<std::uint32_t>(rng.index(max_count + 1));
    if (c > 0) x.push_back({static_cast<std::int32_t>(j), c});
  }
  if (x.empty()) x.push_back({static_cast<std::int32_t>(rng.index(vocab)), 1});
  return x;
}

double check_linear(LinearLoss loss, Rng& rng, double eps) {
  const auto V = 3 + rng.index(6);
  const double l2 = 0.1;
  LinearModel model;
  model.loss = loss;
  LabeledSet<BowVector> batch;
  // Redraw until at least one sample sits away from the hinge kink.
  while (batch.empty()) {
    model.weights.resize(V);
    for (auto& w : model.weights) w = rng.uniform(-1.0, 1.0);
    model.bias = rng.uniform(-1.0, 1.0);
    const auto n = 4 + rng.index(5);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = random_bow(rng, V, 3);
      const int y = static_cast<int>(rng.index(2));
      if (loss == LinearLoss::hinge) {
        const double s = y ? 1.0 : -1.0;
        if (std::abs(1.0 - s * model.margin(x)) < kKinkDistance) continue;
      }
      batch.push_back(std::move(x), y, {});
    }
  }

  std::vector<double> gw;
  double gb = 0.0;
  const double base = linear_loss(model, batch, l2, &gw, &gb);
  double worst = 0.0;
  for (std::size_t j = 0; j <= V; ++j) {
    double& p = j < V ? model.weights[j] : model.bias;
    const double saved = p;
    p = saved + eps;
    const double up = linear_loss(model, batch, l2, nullptr, nullptr);
    p = saved - eps;
    const double down = linear_loss(model, batch, l2, nullptr, nullptr);
    p = saved;
    worst = std::max(worst, relative_error(j < V ? gw[j] : gb, (up - down) / (2 * eps), base, eps));
  }
  return worst;
}

template <class Sample>
double check_network(NeuralModel model, const LabeledSet<Sample>& batch, double l2, double eps) {
  std::vector<Eigen::MatrixXd> grad;
  const double loss = neural_loss(model, batch, l2, &grad);
  double worst = 0.0;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    auto& P = model.params[p];
    for (Eigen::Index k = 0; k < P.size(); ++k) {
      const double saved = P.data()[k];
      P.data()[k] = saved + eps;
      const double up = neural_loss(model, batch, l2, nullptr);
      P.data()[k] = saved - eps;
      const double down = neural_loss(model, batch, l2, nullptr);
      P.data()[k] = saved;
      worst = std::max(worst, relative_error(grad[p].data()[k], (up - down) / (2 * eps), loss, eps));
    }
  }
  return worst;
}

double check_neural(ModelKind kind, Rng& rng, std::uint64_t seed, double eps) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.embedding_dim = 2 + rng.index(4);
  const auto V = 5 + rng.index(6);
  NeuralKind nk = NeuralKind::feedforward_bow;
  if (kind == ModelKind::dnn_bow || kind == ModelKind::dnn_seq) {
    nk = kind == ModelKind::dnn_bow ? NeuralKind::feedforward_bow : NeuralKind::feedforward_seq;
    cfg.hidden_dims.assign(1 + rng.index(2), 0);
    for (auto& h : cfg.hidden_dims) h = 3 + rng.index(4);
  } else {
    nk = kind == ModelKind::gru ? NeuralKind::gru : NeuralKind::lstm;
    cfg.hidden_dims = {3 + rng.index(4)};
  }
  auto model = init_network(nk, V, cfg);
  // Non-zero biases so their gradients are exercised away from the default.
  for (auto& P : model.params) {
    for (Eigen::Index k = 0; k < P.size(); ++k) P.data()[k] += rng.uniform(-0.3, 0.3);
  }
  const double l2 = 0.05;
  const auto n = 3 + rng.index(3);
  if (nk == NeuralKind::feedforward_bow) {
    LabeledSet<BowVector> batch;
    for (std::size_t i = 0; i < n; ++i) batch.push_back(random_bow(rng, V, 4), static_cast<int>(rng.index(2)), {});
    return check_network(model, batch, l2, eps);
  }
  const std::size_t L = 6;
  LabeledSet<SequenceSample> batch;
  for (std::size_t i = 0; i < n; ++i) {
    SequenceSample s;
    s.ids.assign(L, features::Vocabulary::kPad);
    const auto len = 1 + rng.index(L);
    for (std::size_t t = 0; t < len; ++t) s.ids[t] = static_cast<std::int32_t>(1 + rng.index(V - 1));
    batch.push_back(std::move(s), static_cast<int>(rng.index(2)), {});
  }
  return check_network(model, batch, l2, eps);
}

}  // namespace

double grad_check(ModelKind kind, std::uint64_t seed, double eps) {
  if (!(eps > 0.0)) throw Error("grad_check: eps must be positive");
  Rng rng(seed);
  switch (kind) {
    case ModelKind::logreg: return check_linear(LinearLoss::logistic, rng, eps);
    case ModelKind::hinge: return check_linear(LinearLoss::hinge, rng, eps);
    case ModelKind::dnn_bow:
    case ModelKind::dnn_seq:
    case ModelKind::gru:
    case ModelKind::lstm: return check_neural(kind, rng, seed, eps);
    case ModelKind::nb:
    case ModelKind::rf: break;
  }
  throw Error("grad_check: " + std::string(cli_name(kind)) + " is not gradient-trained");
}

}  // namespace vaxnet::models
