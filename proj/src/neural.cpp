#include <cmath>
#include <numeric>

#include "math_util.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/models.hpp"

namespace vaxnet::models {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using detail::sigmoid;
using detail::softplus;

using SparseInput = std::vector<std::pair<std::int32_t, double>>;

VectorXd sigmoid(const VectorXd& v) { return v.unaryExpr([](double a) { return detail::sigmoid(a); }); }

/// Index of the first dense-stack weight matrix.
std::size_t stack_offset(NeuralKind kind) { return kind == NeuralKind::feedforward_bow ? 0 : 1; }

std::vector<bool> bias_mask(const NeuralModel& m) {
  std::vector<bool> mask(m.params.size(), false);
  switch (m.kind) {
    case NeuralKind::feedforward_bow:
    case NeuralKind::feedforward_seq:
      for (std::size_t l = 0; l < m.hidden_dims.size(); ++l) mask[stack_offset(m.kind) + 2 * l + 1] = true;
      break;
    case NeuralKind::gru:
      mask[3] = mask[6] = mask[9] = true;
      break;
    case NeuralKind::lstm:
      mask[3] = true;
      break;
  }
  mask.back() = true;
  return mask;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes(NeuralKind kind, std::size_t vocab,
                                                          std::size_t emb,
                                                          const std::vector<std::size_t>& hidden) {
  using I = Eigen::Index;
  std::vector<std::pair<I, I>> out;
  const auto V = static_cast<I>(vocab), d = static_cast<I>(emb);
  I last = 0;
  switch (kind) {
    case NeuralKind::feedforward_bow:
    case NeuralKind::feedforward_seq: {
      I in = V;
      if (kind == NeuralKind::feedforward_seq) {
        out.push_back({d, V});
        in = d;
      }
      for (const auto h : hidden) {
        out.push_back({static_cast<I>(h), in});
        out.push_back({static_cast<I>(h), 1});
        in = static_cast<I>(h);
      }
      last = in;
      break;
    }
    case NeuralKind::gru: {
      const auto h = static_cast<I>(hidden.front());
      out.push_back({d, V});
      for (int gate = 0; gate < 3; ++gate) {
        out.push_back({h, d});
        out.push_back({h, h});
        out.push_back({h, 1});
      }
      last = h;
      break;
    }
    case NeuralKind::lstm: {
      const auto h = static_cast<I>(hidden.front());
      out.push_back({d, V});
      out.push_back({4 * h, d});
      out.push_back({4 * h, h});
      out.push_back({4 * h, 1});
      last = h;
      break;
    }
  }
  out.push_back({1, last});
  out.push_back({1, 1});
  return out;
}

/// Forward and backward passes for one sample at a time. Gradients are
/// accumulated into `grad` scaled by `weight`.
class Net {
 public:
  explicit Net(const NeuralModel& m) : m_(m), P_(m.params) {}

  double margin(const SparseInput& x) { return ff_forward_bow(x); }

  double margin(std::span<const std::int32_t> ids) {
    switch (m_.kind) {
      case NeuralKind::feedforward_seq: return ff_forward_seq(ids);
      case NeuralKind::gru: return gru_forward(ids);
      case NeuralKind::lstm: return lstm_forward(ids);
      default: throw Error("bag-of-words network given a sequence");
    }
  }

  void backward(const SparseInput& x, double dm, std::vector<MatrixXd>& grad) {
    VectorXd da0 = ff_backward(dm, grad, false);
    (void)da0;
    const auto& dz1 = first_dz_;
    for (const auto& [j, v] : x) grad[0].col(j) += v * dz1;
  }

  void backward(std::span<const std::int32_t> ids, double dm, std::vector<MatrixXd>& grad) {
    switch (m_.kind) {
      case NeuralKind::feedforward_seq: {
        const VectorXd dpool = ff_backward(dm, grad, true);
        if (ids.empty()) return;
        const double inv = 1.0 / static_cast<double>(ids.size());
        for (const auto id : ids) grad[0].col(id) += inv * dpool;
        return;
      }
      case NeuralKind::gru: gru_backward(ids, dm, grad); return;
      case NeuralKind::lstm: lstm_backward(ids, dm, grad); return;
      default: throw Error("bag-of-words network given a sequence");
    }
  }

 private:
  // Feedforward stack -------------------------------------------------------

  double head(const VectorXd& h) { return (P_[P_.size() - 2] * h)(0) + P_.back()(0, 0); }

  double ff_stack(VectorXd first_pre) {
    const auto off = stack_offset(m_.kind);
    const auto L = m_.hidden_dims.size();
    z_.assign(L, {});
    a_.assign(L + 1, {});
    z_[0] = std::move(first_pre);
    a_[1] = z_[0].cwiseMax(0.0);
    for (std::size_t l = 1; l < L; ++l) {
      z_[l] = P_[off + 2 * l] * a_[l] + P_[off + 2 * l + 1];
      a_[l + 1] = z_[l].cwiseMax(0.0);
    }
    return head(a_[L]);
  }

  double ff_forward_bow(const SparseInput& x) {
    VectorXd z = P_[1];
    for (const auto& [j, v] : x) z += v * P_[0].col(j);
    return ff_stack(std::move(z));
  }

  double ff_forward_seq(std::span<const std::int32_t> ids) {
    const auto& E = P_[0];
    a_.assign(1, VectorXd::Zero(E.rows()));
    VectorXd pooled = VectorXd::Zero(E.rows());
    for (const auto id : ids) pooled += E.col(id);
    if (!ids.empty()) pooled /= static_cast<double>(ids.size());
    VectorXd z = P_[1] * pooled + P_[2];
    const double m = ff_stack(std::move(z));
    a_[0] = std::move(pooled);
    return m;
  }

  /// Returns the gradient with respect to the stack input when requested.
  VectorXd ff_backward(double dm, std::vector<MatrixXd>& grad, bool want_input) {
    const auto off = stack_offset(m_.kind);
    const auto L = m_.hidden_dims.size();
    const auto ho = P_.size() - 2;
    grad[ho] += dm * a_[L].transpose();
    grad[ho + 1](0, 0) += dm;
    VectorXd da = dm * P_[ho].transpose();
    for (std::size_t l = L; l-- > 0;) {
      VectorXd dz = da.cwiseProduct((z_[l].array() > 0.0).cast<double>().matrix());
      grad[off + 2 * l + 1] += dz;
      if (l > 0) {
        grad[off + 2 * l] += dz * a_[l].transpose();
        da = P_[off + 2 * l].transpose() * dz;
      } else if (want_input) {
        grad[off] += dz * a_[0].transpose();
        return P_[off].transpose() * dz;
      } else {
        first_dz_ = std::move(dz);
      }
    }
    return {};
  }

  // GRU ---------------------------------------------------------------------

  struct GruStep {
    VectorXd h_prev, z, r, n;
  };

  double gru_forward(std::span<const std::int32_t> ids) {
    const auto& E = P_[0];
    const auto H = P_[2].rows();
    VectorXd h = VectorXd::Zero(H);
    gru_.clear();
    for (const auto id : ids) {
      const auto x = E.col(id);
      GruStep s;
      s.h_prev = h;
      s.z = sigmoid(VectorXd(P_[1] * x + P_[2] * h + P_[3]));
      s.r = sigmoid(VectorXd(P_[4] * x + P_[5] * h + P_[6]));
      s.n = (P_[7] * x + P_[8] * s.r.cwiseProduct(h) + P_[9]).array().tanh().matrix();
      h = (1.0 - s.z.array()).matrix().cwiseProduct(s.n) + s.z.cwiseProduct(h);
      gru_.push_back(std::move(s));
    }
    h_last_ = h;
    return head(h);
  }

  void gru_backward(std::span<const std::int32_t> ids, double dm, std::vector<MatrixXd>& grad) {
    const auto ho = P_.size() - 2;
    grad[ho] += dm * h_last_.transpose();
    grad[ho + 1](0, 0) += dm;
    VectorXd dh = dm * P_[ho].transpose();
    const auto& E = P_[0];
    for (std::size_t t = ids.size(); t-- > 0;) {
      const auto& s = gru_[t];
      const auto x = E.col(ids[t]);
      const VectorXd dn = dh.cwiseProduct((1.0 - s.z.array()).matrix());
      const VectorXd dz = dh.cwiseProduct(s.h_prev - s.n);
      VectorXd dh_prev = dh.cwiseProduct(s.z);

      const VectorXd dn_pre = dn.cwiseProduct((1.0 - s.n.array().square()).matrix());
      const VectorXd dz_pre = dz.cwiseProduct(s.z.cwiseProduct((1.0 - s.z.array()).matrix()));
      const VectorXd rh = s.r.cwiseProduct(s.h_prev);
      grad[7] += dn_pre * x.transpose();
      grad[8] += dn_pre * rh.transpose();
      grad[9] += dn_pre;
      const VectorXd drh = P_[8].transpose() * dn_pre;
      const VectorXd dr = drh.cwiseProduct(s.h_prev);
      dh_prev += drh.cwiseProduct(s.r);
      const VectorXd dr_pre = dr.cwiseProduct(s.r.cwiseProduct((1.0 - s.r.array()).matrix()));

      grad[4] += dr_pre * x.transpose();
      grad[5] += dr_pre * s.h_prev.transpose();
      grad[6] += dr_pre;
      dh_prev += P_[5].transpose() * dr_pre;
      grad[1] += dz_pre * x.transpose();
      grad[2] += dz_pre * s.h_prev.transpose();
      grad[3] += dz_pre;
      dh_prev += P_[2].transpose() * dz_pre;

      grad[0].col(ids[t]) +=
          P_[1].transpose() * dz_pre + P_[4].transpose() * dr_pre + P_[7].transpose() * dn_pre;
      dh = std::move(dh_prev);
    }
  }

  // LSTM --------------------------------------------------------------------

  struct LstmStep {
    VectorXd h_prev, c_prev, i, f, g, o, tanh_c;
  };

  double lstm_forward(std::span<const std::int32_t> ids) {
    const auto& E = P_[0];
    const auto H = P_[2].cols();
    VectorXd h = VectorXd::Zero(H), c = VectorXd::Zero(H);
    lstm_.clear();
    for (const auto id : ids) {
      const VectorXd a = P_[1] * E.col(id) + P_[2] * h + P_[3];
      LstmStep s;
      s.h_prev = h;
      s.c_prev = c;
      s.i = sigmoid(VectorXd(a.segment(0, H)));
      s.f = sigmoid(VectorXd(a.segment(H, H)));
      s.g = a.segment(2 * H, H).array().tanh().matrix();
      s.o = sigmoid(VectorXd(a.segment(3 * H, H)));
      c = s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
      s.tanh_c = c.array().tanh().matrix();
      h = s.o.cwiseProduct(s.tanh_c);
      lstm_.push_back(std::move(s));
    }
    h_last_ = h;
    return head(h);
  }

  void lstm_backward(std::span<const std::int32_t> ids, double dm, std::vector<MatrixXd>& grad) {
    const auto ho = P_.size() - 2;
    const auto H = P_[2].cols();
    grad[ho] += dm * h_last_.transpose();
    grad[ho + 1](0, 0) += dm;
    VectorXd dh = dm * P_[ho].transpose();
    VectorXd dc = VectorXd::Zero(H);
    const auto& E = P_[0];
    VectorXd da(4 * H);
    for (std::size_t t = ids.size(); t-- > 0;) {
      const auto& s = lstm_[t];
      const auto x = E.col(ids[t]);
      const VectorXd d_o = dh.cwiseProduct(s.tanh_c);
      dc += dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
      const VectorXd di = dc.cwiseProduct(s.g);
      const VectorXd dg = dc.cwiseProduct(s.i);
      const VectorXd df = dc.cwiseProduct(s.c_prev);
      da.segment(0, H) = di.cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
      da.segment(H, H) = df.cwiseProduct(s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
      da.segment(2 * H, H) = dg.cwiseProduct((1.0 - s.g.array().square()).matrix());
      da.segment(3 * H, H) = d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
      grad[1] += da * x.transpose();
      grad[2] += da * s.h_prev.transpose();
      grad[3] += da;
      grad[0].col(ids[t]) += P_[1].transpose() * da;
      dh = P_[2].transpose() * da;
      dc = dc.cwiseProduct(s.f).eval();
    }
  }

  const NeuralModel& m_;
  const std::vector<MatrixXd>& P_;
  std::vector<VectorXd> z_, a_;
  VectorXd first_dz_;
  VectorXd h_last_;
  std::vector<GruStep> gru_;
  std::vector<LstmStep> lstm_;
};

SparseInput normalized(const BowVector& x, std::size_t vocab) {
  double total = 0.0;
  for (const auto& e : x) {
    if (e.index < 0 || static_cast<std::size_t>(e.index) >= vocab) {
      throw Error("feature index outside the model vocabulary");
    }
    total += e.count;
  }
  SparseInput out;
  if (total == 0.0) return out;
  out.reserve(x.size());
  for (const auto& e : x) out.push_back({e.index, e.count / total});
  return out;
}

std::span<const std::int32_t> prefix(const SequenceSample& x, std::size_t vocab) {
  const auto ids = std::span(x.ids).first(x.length());
  for (const auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) throw Error("token id outside the model vocabulary");
  }
  return ids;
}

template <class Sample>
bool accepts(NeuralKind kind) {
  if constexpr (std::is_same_v<Sample, BowVector>) {
    return kind == NeuralKind::feedforward_bow;
  } else {
    return kind != NeuralKind::feedforward_bow;
  }
}

/// Mean log-loss over `idx` plus the weight penalty; `grad` is overwritten.
template <class Sample>
double batch_loss(const NeuralModel& model, const LabeledSet<Sample>& set,
                  std::span<const std::size_t> idx, double l2, std::vector<MatrixXd>* grad) {
  if (!accepts<Sample>(model.kind)) throw Error("sample representation does not match the network");
  if (grad) {
    grad->resize(model.params.size());
    for (std::size_t p = 0; p < model.params.size(); ++p) {
      (*grad)[p].setZero(model.params[p].rows(), model.params[p].cols());
    }
  }
  Net net(model);
  const double inv = 1.0 / static_cast<double>(idx.size());
  double loss = 0.0;
  for (const auto i : idx) {
    const int y = set.labels[i] ? 1 : 0;
    if constexpr (std::is_same_v<Sample, BowVector>) {
      const auto x = normalized(set.samples[i], model.vocab_size);
      const double m = net.margin(x);
      loss += softplus(m) - y * m;
      if (grad) net.backward(x, (sigmoid(m) - y) * inv, *grad);
    } else {
      const auto ids = prefix(set.samples[i], model.vocab_size);
      const double m = net.margin(ids);
      loss += softplus(m) - y * m;
      if (grad) net.backward(ids, (sigmoid(m) - y) * inv, *grad);
    }
  }
  loss *= inv;
  const auto mask = bias_mask(model);
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    if (mask[p]) continue;
    loss += 0.5 * l2 * model.params[p].squaredNorm();
    if (grad) (*grad)[p] += l2 * model.params[p];
  }
  return loss;
}

template <class Sample>
NeuralModel train_network(NeuralKind kind, const LabeledSet<Sample>& train, std::size_t vocab_size,
                          const TrainConfig& cfg, TrainLog* log) {
  cfg.validate();
  if (train.empty()) throw Error("cannot train on an empty set");
  auto model = init_network(kind, vocab_size, cfg);

  Rng rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<MatrixXd> grad, velocity;
  for (const auto& p : model.params) velocity.push_back(MatrixXd::Zero(p.rows(), p.cols()));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, order.size() - start);
      const double l = batch_loss(model, train, std::span(order).subspan(start, len), cfg.l2_penalty, &grad);
      if (!std::isfinite(l)) throw DivergenceError(static_cast<int>(epoch));
      if (cfg.max_grad_norm) {
        double sq = 0.0;
        for (const auto& g : grad) sq += g.squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > *cfg.max_grad_norm) {
          for (auto& g : grad) g *= *cfg.max_grad_norm / norm;
        }
      }
      for (std::size_t p = 0; p < grad.size(); ++p) {
        if (cfg.momentum > 0.0) {
          velocity[p] = cfg.momentum * velocity[p] - cfg.learning_rate * grad[p];
          model.params[p] += velocity[p];
        } else {
          model.params[p] -= cfg.learning_rate * grad[p];
        }
      }
      total += l;
      ++batches;
    }
    const double mean = total / static_cast<double>(batches);
    if (!std::isfinite(mean) || !model.all_finite()) throw DivergenceError(static_cast<int>(epoch));
    if (log) log->epoch_loss.push_back(mean);
  }
  return model;
}

}  // namespace

NeuralModel init_network(NeuralKind kind, std::size_t vocab_size, const TrainConfig& cfg) {
  cfg.validate();
  if (vocab_size == 0) throw Error("network needs a non-empty vocabulary");
  NeuralModel m;
  m.kind = kind;
  m.vocab_size = vocab_size;
  m.embedding_dim = kind == NeuralKind::feedforward_bow ? 0 : cfg.embedding_dim;
  m.hidden_dims = cfg.hidden_dims;
  if (kind == NeuralKind::gru || kind == NeuralKind::lstm) m.hidden_dims.resize(1);

  Rng rng(derive_seed(cfg.seed, 0));
  const auto dims = shapes(kind, vocab_size, cfg.embedding_dim, m.hidden_dims);
  m.params.reserve(dims.size());
  for (const auto& [r, c] : dims) m.params.push_back(MatrixXd::Zero(r, c));
  const auto mask = bias_mask(m);
  for (std::size_t p = 0; p < m.params.size(); ++p) {
    if (mask[p]) continue;
    const bool embedding = kind != NeuralKind::feedforward_bow && p == 0;
    const double scale = embedding ? 1.0 : 1.0 / std::sqrt(static_cast<double>(m.params[p].cols()));
    auto& P = m.params[p];
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      for (Eigen::Index i = 0; i < P.rows(); ++i) P(i, j) = rng.uniform(-scale, scale);
    }
  }
  if (kind == NeuralKind::lstm) {
    const auto H = static_cast<Eigen::Index>(m.hidden_dims.front());
    m.params[3].block(H, 0, H, 1).setOnes();
  }
  return m;
}

double NeuralModel::score(const BowVector& x) const {
  if (kind != NeuralKind::feedforward_bow) throw Error("sequence network given a bag-of-words sample");
  Net net(*this);
  return sigmoid(net.margin(normalized(x, vocab_size)));
}

double NeuralModel::score(const SequenceSample& x) const {
  if (kind == NeuralKind::feedforward_bow) throw Error("bag-of-words network given a sequence");
  Net net(*this);
  return sigmoid(net.margin(prefix(x, vocab_size)));
}

bool NeuralModel::all_finite() const {
  for (const auto& p : params) {
    if (!p.allFinite()) return false;
  }
  return true;
}

NeuralModel train_feedforward(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                              const TrainConfig& cfg, TrainLog* log) {
  return train_network(NeuralKind::feedforward_bow, train, vocab_size, cfg, log);
}

NeuralModel train_feedforward(const LabeledSet<SequenceSample>& train, std::size_t vocab_size,
                              const TrainConfig& cfg, TrainLog* log) {
  return train_network(NeuralKind::feedforward_seq, train, vocab_size, cfg, log);
}

NeuralModel train_recurrent(const LabeledSet<SequenceSample>& train, std::size_t vocab_size,
                            RecurrentKind kind, const TrainConfig& cfg, TrainLog* log) {
  if (std::all_of(train.samples.begin(), train.samples.end(),
                  [](const SequenceSample& s) { return s.length() == 0; })) {
    throw Error("every training sequence is empty");
  }
  return train_network(kind == RecurrentKind::gru ? NeuralKind::gru : NeuralKind::lstm, train,
                       vocab_size, cfg, log);
}

double neural_loss(const NeuralModel& model, const LabeledSet<BowVector>& batch, double l2,
                   std::vector<MatrixXd>* grad) {
  if (batch.empty()) throw Error("neural_loss: empty batch");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return batch_loss(model, batch, idx, l2, grad);
}

double neural_loss(const NeuralModel& model, const LabeledSet<SequenceSample>& batch, double l2,
                   std::vector<MatrixXd>* grad) {
  if (batch.empty()) throw Error("neural_loss: empty batch");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return batch_loss(model, batch, idx, l2, grad);
}

}  // namespace vaxnet::models
