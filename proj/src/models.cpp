#include <sstream>

#include "vaxnet/error.hpp"
#include "vaxnet/io.hpp"
#include "vaxnet/models.hpp"

namespace vaxnet::models {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

std::string_view neural_kind_name(NeuralKind k) {
  switch (k) {
    case NeuralKind::feedforward_bow: return "feedforward_bow";
    case NeuralKind::feedforward_seq: return "feedforward_seq";
    case NeuralKind::gru: return "gru";
    case NeuralKind::lstm: return "lstm";
  }
  return "";
}

NeuralKind parse_neural_kind(std::string_view s) {
  for (const auto k : {NeuralKind::feedforward_bow, NeuralKind::feedforward_seq, NeuralKind::gru, NeuralKind::lstm}) {
    if (neural_kind_name(k) == s) return k;
  }
  throw Error("unknown network kind '" + std::string(s) + "'");
}

ojson params_to_json(const Model& model) {
  return std::visit(
      [](const auto& m) -> ojson {
        using T = std::decay_t<decltype(m)>;
        ojson j;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["loss"] = m.loss == LinearLoss::logistic ? "logistic" : "hinge";
          j["bias"] = m.bias;
          j["weights"] = m.weights;
        } else if constexpr (std::is_same_v<T, NBModel>) {
          j["log_prior"] = m.log_prior;
          j["log_likelihood"] = m.log_likelihood;
        } else if constexpr (std::is_same_v<T, Forest>) {
          j["max_features"] = m.max_features;
          j["seed"] = m.seed;
          ojson trees = ojson::array();
          for (const auto& t : m.trees) {
            ojson feature = ojson::array(), threshold = ojson::array(), left = ojson::array(),
                  right = ojson::array(), value = ojson::array();
            for (const auto& n : t.nodes) {
              feature.push_back(n.feature);
              threshold.push_back(n.threshold);
              left.push_back(n.left);
              right.push_back(n.right);
              value.push_back(n.value);
            }
            trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                             {"right", right}, {"value", value}});
          }
          j["trees"] = std::move(trees);
        } else {
          j["kind"] = neural_kind_name(m.kind);
          j["vocab_size"] = m.vocab_size;
          j["embedding_dim"] = m.embedding_dim;
          j["hidden_dims"] = m.hidden_dims;
          ojson mats = ojson::array();
          for (const auto& p : m.params) {
            mats.push_back({{"rows", p.rows()}, {"cols", p.cols()},
                            {"data", std::vector<double>(p.data(), p.data() + p.size())}});
          }
          j["matrices"] = std::move(mats);
        }
        return j;
      },
      model);
}

Model params_from_json(ModelKind kind, const json& j, std::size_t vocab_size) {
  switch (kind) {
    case ModelKind::logreg:
    case ModelKind::hinge: {
      LinearModel m;
      m.loss = kind == ModelKind::logreg ? LinearLoss::logistic : LinearLoss::hinge;
      m.bias = j.at("bias").get<double>();
      m.weights = j.at("weights").get<std::vector<double>>();
      if (m.weights.size() != vocab_size) throw Error("weight vector does not match the vocabulary");
      return m;
    }
    case ModelKind::nb: {
      NBModel m;
      m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
      m.log_likelihood = j.at("log_likelihood").get<std::array<std::vector<double>, 2>>();
      for (const auto& ll : m.log_likelihood) {
        if (ll.size() != vocab_size) throw Error("likelihood table does not match the vocabulary");
      }
      return m;
    }
    case ModelKind::rf: {
      Forest f;
      f.max_features = j.at("max_features").get<std::size_t>();
      f.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& t : j.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<std::int32_t>>();
        const auto right = t.at("right").get<std::vector<std::int32_t>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const auto n = feature.size();
        if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n) {
          throw Error("malformed tree");
        }
        DecisionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
          TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
          const auto in_range = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n); };
          if (!node.leaf() && (!in_range(node.left) || !in_range(node.right) ||
                               static_cast<std::size_t>(node.feature) >= vocab_size)) {
            throw Error("malformed tree node");
          }
          if (!(node.value >= 0.0 && node.value <= 1.0)) throw Error("tree leaf fraction outside [0, 1]");
          tree.nodes.push_back(node);
        }
        f.trees.push_back(std::move(tree));
      }
      if (f.trees.empty()) throw Error("forest has no trees");
      return f;
    }
    default: {
      NeuralModel m;
      m.kind = parse_neural_kind(j.at("kind").get<std::string>());
      m.vocab_size = j.at("vocab_size").get<std::size_t>();
      m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
      m.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
      if (m.vocab_size != vocab_size) throw Error("network does not match the vocabulary");
      for (const auto& mat : j.at("matrices")) {
        const auto rows = mat.at("rows").get<Eigen::Index>(), cols = mat.at("cols").get<Eigen::Index>();
        const auto data = mat.at("data").get<std::vector<double>>();
        if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
          throw Error("matrix shape does not match its data");
        }
        m.params.push_back(Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols));
      }
      TrainConfig shape_cfg;
      shape_cfg.hidden_dims = m.hidden_dims.empty() ? std::vector<std::size_t>{1} : m.hidden_dims;
      shape_cfg.embedding_dim = std::max<std::size_t>(1, m.embedding_dim);
      const auto expected = init_network(m.kind, vocab_size, shape_cfg);
      if (expected.params.size() != m.params.size()) throw Error("network has the wrong number of matrices");
      for (std::size_t p = 0; p < m.params.size(); ++p) {
        if (expected.params[p].rows() != m.params[p].rows() || expected.params[p].cols() != m.params[p].cols()) {
          throw Error("network matrix " + std::to_string(p) + " has the wrong shape");
        }
      }
      if (!m.all_finite()) throw Error("network has non-finite parameters");
      return m;
    }
  }
}

void require_repr(const TrainedModel& m, features::Representation r) {
  if (representation(m.kind) != r) {
    throw Error(std::string(cli_name(m.kind)) + " expects " + std::string(features::name(representation(m.kind))) +
                " samples, got " + std::string(features::name(r)));
  }
}

}  // namespace

TrainedModel train_model(ModelKind kind, const LabeledSet<BowVector>& train, std::size_t vocab_size,
                         const TrainConfig& cfg) {
  TrainedModel out{kind, cfg, vocab_size, {}};
  require_repr(out, features::Representation::bow);
  switch (kind) {
    case ModelKind::logreg: out.model = train_logreg(train, vocab_size, cfg); break;
    case ModelKind::hinge: out.model = train_linear_hinge(train, vocab_size, cfg); break;
    case ModelKind::nb: out.model = train_multinomial_nb(train, vocab_size, cfg.alpha); break;
    case ModelKind::rf: out.model = train_random_forest(train, vocab_size, cfg); break;
    case ModelKind::dnn_bow: out.model = train_feedforward(train, vocab_size, cfg); break;
    default: break;
  }
  return out;
}

TrainedModel train_model(ModelKind kind, const LabeledSet<SequenceSample>& train, std::size_t vocab_size,
                         const TrainConfig& cfg) {
  TrainedModel out{kind, cfg, vocab_size, {}};
  require_repr(out, features::Representation::sequence);
  switch (kind) {
    case ModelKind::dnn_seq: out.model = train_feedforward(train, vocab_size, cfg); break;
    case ModelKind::gru: out.model = train_recurrent(train, vocab_size, RecurrentKind::gru, cfg); break;
    case ModelKind::lstm: out.model = train_recurrent(train, vocab_size, RecurrentKind::lstm, cfg); break;
    default: break;
  }
  return out;
}

double predict_score(const TrainedModel& m, const BowVector& x) {
  require_repr(m, features::Representation::bow);
  return std::visit([&](const auto& model) { return model.score(x); }, m.model);
}

double predict_score(const TrainedModel& m, const SequenceSample& x) {
  require_repr(m, features::Representation::sequence);
  const auto* net = std::get_if<NeuralModel>(&m.model);
  if (!net) throw Error("sequence model without a network");
  return net->score(x);
}

ojson to_json(const ModelFile& f) {
  const auto& m = f.model;
  ojson j;
  j["format"] = "vaxnet-model";
  j["version"] = kFormatVersion;
  j["model"] = cli_name(m.kind);
  j["representation"] = features::name(representation(m.kind));
  j["vocab_size"] = m.vocab_size;
  j["vocab_hash"] = f.vocab.hash();
  j["max_len"] = f.max_len;
  j["config"] = to_json(m.config);
  j["vocabulary"] = f.vocab.tokens();
  j["params"] = params_to_json(m.model);
  return j;
}

ModelFile model_file_from_json(const json& j) {
  try {
    if (j.at("format") != "vaxnet-model") throw Error("not a model file");
    if (j.at("version").get<int>() != kFormatVersion) throw Error("unsupported model file version");
    ModelFile f;
    f.model.kind = parse_model_kind(j.at("model").get<std::string>());
    if (features::parse_representation(j.at("representation").get<std::string>()) != representation(f.model.kind)) {
      throw Error("representation does not match the model");
    }
    f.model.vocab_size = j.at("vocab_size").get<std::size_t>();
    f.max_len = j.at("max_len").get<std::size_t>();
    f.model.config = config_from_json(j.at("config"), TrainConfig{});
    f.vocab = features::Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    if (f.vocab.hash() != j.at("vocab_hash").get<std::string>()) throw Error("vocabulary hash mismatch");
    if (f.vocab.size() != f.model.vocab_size) throw Error("vocabulary size mismatch");
    f.model.model = params_from_json(f.model.kind, j.at("params"), f.model.vocab_size);
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const ModelFile& f) {
  io::write_file(path, to_json(f).dump() + "\n");
}

ModelFile read_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  try {
    return model_file_from_json(j);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace vaxnet::models
