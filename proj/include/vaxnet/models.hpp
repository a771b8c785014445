#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "vaxnet/features.hpp"

namespace vaxnet::models {

using features::BowVector;
using features::LabeledSet;
using features::SequenceSample;

/// Classifier rows, in report order.
enum class ModelKind { logreg, rf, hinge, nb, dnn_bow, dnn_seq, gru, lstm };

inline constexpr std::array<ModelKind, 8> kAllModels = {
    ModelKind::logreg,  ModelKind::rf,      ModelKind::hinge, ModelKind::nb,
    ModelKind::dnn_bow, ModelKind::dnn_seq, ModelKind::gru,   ModelKind::lstm};

/// Command-line spelling: logreg, rf, hinge, nb, dnn-bow, dnn-seq, gru, lstm.
std::string_view cli_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);
/// Report label, e.g. "Logistic Regression" or "Linear SGD".
std::string_view display_name(ModelKind kind);
features::Representation representation(ModelKind kind);
/// Report label of a representation: "Bag of Words" or "Sequential".
std::string_view display_name(features::Representation r);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  // Neural networks.
  std::vector<std::size_t> hidden_dims{64};
  std::size_t embedding_dim = 32;
  std::optional<double> max_grad_norm;
  double momentum = 0.0;

  // Random forest. max_depth 0 means unlimited; max_features defaults to
  // floor(sqrt(V)).
  std::size_t n_trees = 100;
  std::size_t max_depth = 20;
  std::optional<std::size_t> max_features;
  bool bootstrap = true;
  std::size_t min_samples_split = 2;

  // Multinomial naive Bayes smoothing.
  double alpha = 1.0;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Defaults for `kind` from the bundled defaults.json.
TrainConfig default_config(ModelKind kind);

nlohmann::ordered_json to_json(const TrainConfig& cfg);
/// Overlays the fields present in `j` on `base`; unknown keys are rejected.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base);

/// Per-epoch mean training loss (data term plus penalty), filled by trainers
/// that accept it.
struct TrainLog {
  std::vector<double> epoch_loss;
};

// ---------------------------------------------------------------------------
// Linear models

enum class LinearLoss { logistic, hinge };

struct LinearModel {
  LinearLoss loss = LinearLoss::logistic;
  std::vector<double> weights;
  double bias = 0.0;

  double margin(const BowVector& x) const;
  /// Sigmoid of the margin (hinge margins are squashed the same way).
  double score(const BowVector& x) const;
};

/// Minibatch SGD on mean loss + (l2/2)|w|^2 starting from zero weights.
/// Feature indices must be < vocab_size.
LinearModel train_logreg(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                         const TrainConfig& cfg, TrainLog* log = nullptr);
LinearModel train_linear_hinge(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                               const TrainConfig& cfg, TrainLog* log = nullptr);

// ---------------------------------------------------------------------------
// Multinomial naive Bayes

struct NBModel {
  /// Index 0 is the Other class, 1 Antivaxx.
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood;

  /// Posterior probability of the Antivaxx class.
  double score(const BowVector& x) const;
};

/// Closed form with additive smoothing over a vocabulary of `vocab_size`
/// indices.
NBModel train_multinomial_nb(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                             double alpha = 1.0);

// ---------------------------------------------------------------------------
// Random forest

struct TreeNode {
  /// -1 for leaves. Internal nodes send x[feature] <= threshold left.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Positive fraction of the training samples that reached the node.
  double value = 0.0;

  bool leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(const BowVector& x) const;
  std::size_t depth() const;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t max_features = 0;
  std::uint64_t seed = 0;

  /// Mean of the trees' leaf fractions.
  double score(const BowVector& x) const;
};

/// Trees are trained in parallel, tree t seeded with derive_seed(seed, t).
Forest train_random_forest(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                           const TrainConfig& cfg);

namespace serial {
Forest train_random_forest(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                           const TrainConfig& cfg);
}

// ---------------------------------------------------------------------------
// Neural networks

enum class NeuralKind { feedforward_bow, feedforward_seq, gru, lstm };

/// Parameters are stored as a flat list of matrices whose layout depends on
/// the kind:
///   feedforward_bow  [W1, b1, ..., Wk, bk, w_out, b_out]   (W1 is h1 x V)
///   feedforward_seq  [E, W1, b1, ..., w_out, b_out]       (E is d x V)
///   gru              [E, Wz, Uz, bz, Wr, Ur, br, Wn, Un, bn, w_out, b_out]
///   lstm             [E, W, U, b, w_out, b_out]           (gates i, f, g, o)
/// Bag-of-words inputs are L1-normalized counts; the sequential feedforward
/// model mean-pools embeddings over the non-padding prefix.
struct NeuralModel {
  NeuralKind kind = NeuralKind::feedforward_bow;
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::vector<Eigen::MatrixXd> params;

  double score(const BowVector& x) const;
  double score(const SequenceSample& x) const;
  bool all_finite() const;
};

/// Freshly initialized network: weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// embeddings U(-1, 1), biases zero except the LSTM forget gate at 1.
NeuralModel init_network(NeuralKind kind, std::size_t vocab_size, const TrainConfig& cfg);

NeuralModel train_feedforward(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                              const TrainConfig& cfg, TrainLog* log = nullptr);
NeuralModel train_feedforward(const LabeledSet<SequenceSample>& train, std::size_t vocab_size,
                              const TrainConfig& cfg, TrainLog* log = nullptr);

enum class RecurrentKind { gru, lstm };
NeuralModel train_recurrent(const LabeledSet<SequenceSample>& train, std::size_t vocab_size,
                            RecurrentKind kind, const TrainConfig& cfg, TrainLog* log = nullptr);

/// Mean log-loss of `model` on a batch plus (l2/2) times the squared norm of
/// every non-bias matrix, with its gradient in the layout of `params`.
/// Exposed for gradient checking.
double neural_loss(const NeuralModel& model, const LabeledSet<BowVector>& batch, double l2,
                   std::vector<Eigen::MatrixXd>* grad);
double neural_loss(const NeuralModel& model, const LabeledSet<SequenceSample>& batch, double l2,
                   std::vector<Eigen::MatrixXd>* grad);

/// Regularized mean loss of a linear model on a batch, with gradients.
double linear_loss(const LinearModel& model, const LabeledSet<BowVector>& batch, double l2,
                   std::vector<double>* grad_w, double* grad_b);

/// Largest relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
/// over every parameter of a randomly drawn small problem for `kind`, using
/// central differences with step `eps`. Hinge points within 1e-3 of the kink
/// are excluded. NB and RF have no gradients and are rejected.
double grad_check(ModelKind kind, std::uint64_t seed, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Uniform interface

using Model = std::variant<LinearModel, NBModel, Forest, NeuralModel>;

struct TrainedModel {
  ModelKind kind = ModelKind::logreg;
  TrainConfig config;
  std::size_t vocab_size = 0;
  Model model;
};

TrainedModel train_model(ModelKind kind, const LabeledSet<BowVector>& train,
                         std::size_t vocab_size, const TrainConfig& cfg);
TrainedModel train_model(ModelKind kind, const LabeledSet<SequenceSample>& train,
                         std::size_t vocab_size, const TrainConfig& cfg);

/// Score in [0, 1]; throws if the sample representation does not match the
/// model.
double predict_score(const TrainedModel& m, const BowVector& x);
double predict_score(const TrainedModel& m, const SequenceSample& x);

template <class Sample>
std::vector<double> predict_scores(const TrainedModel& m, const LabeledSet<Sample>& set) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const auto& s : set.samples) out.push_back(predict_score(m, s));
  return out;
}

/// A trained model bundled with the vocabulary and sequence length needed to
/// featurize new documents.
struct ModelFile {
  TrainedModel model;
  features::Vocabulary vocab;
  std::size_t max_len = 0;
};

nlohmann::ordered_json to_json(const ModelFile& f);
ModelFile model_file_from_json(const nlohmann::json& j);
void write_model(const std::filesystem::path& path, const ModelFile& f);
ModelFile read_model(const std::filesystem::path& path);

}  // namespace vaxnet::models
