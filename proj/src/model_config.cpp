#include <cmath>

#include "vaxnet/error.hpp"
#include "vaxnet/models.hpp"
#include "vaxnet/resources.hpp"

namespace vaxnet::models {
namespace {

struct KindInfo {
  ModelKind kind;
  std::string_view cli;
  std::string_view display;
  features::Representation repr;
};

constexpr std::array<KindInfo, 8> kKinds = {{
    {ModelKind::logreg, "logreg", "Logistic Regression", features::Representation::bow},
    {ModelKind::rf, "rf", "Random Forest", features::Representation::bow},
    {ModelKind::hinge, "hinge", "Linear SGD", features::Representation::bow},
    {ModelKind::nb, "nb", "Multinomial NB", features::Representation::bow},
    {ModelKind::dnn_bow, "dnn-bow", "DNN", features::Representation::bow},
    {ModelKind::dnn_seq, "dnn-seq", "DNN", features::Representation::sequence},
    {ModelKind::gru, "gru", "GRU", features::Representation::sequence},
    {ModelKind::lstm, "lstm", "LSTM", features::Representation::sequence},
}};

const KindInfo& info(ModelKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw Error("unknown model kind");
}

const nlohmann::json& bundled_defaults() {
  static const nlohmann::json j = [] {
    try {
      return nlohmann::json::parse(resources::load("defaults.json"));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("defaults.json: ") + e.what());
    }
  }();
  return j;
}

std::string_view defaults_section(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg:
    case ModelKind::hinge: return "linear";
    case ModelKind::rf: return "forest";
    case ModelKind::nb: return "nb";
    default: return "neural";
  }
}

}  // namespace

std::string_view cli_name(ModelKind kind) { return info(kind).cli; }

ModelKind parse_model_kind(std::string_view s) {
  for (const auto& k : kKinds) {
    if (k.cli == s) return k.kind;
  }
  throw ConfigError("unknown model '" + std::string(s) +
                    "' (expected logreg, hinge, nb, rf, dnn-bow, dnn-seq, gru or lstm)");
}

std::string_view display_name(ModelKind kind) { return info(kind).display; }

features::Representation representation(ModelKind kind) { return info(kind).repr; }

std::string_view display_name(features::Representation r) {
  return r == features::Representation::bow ? "Bag of Words" : "Sequential";
}

void TrainConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) fail("l2_penalty must be >= 0");
  if (hidden_dims.empty()) fail("hidden_dims must be non-empty");
  for (const auto h : hidden_dims) {
    if (h < 1) fail("hidden_dims entries must be >= 1");
  }
  if (embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (max_grad_norm && !(*max_grad_norm > 0.0)) fail("max_grad_norm must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (n_trees < 1) fail("n_trees must be >= 1");
  if (max_features && *max_features < 1) fail("max_features must be >= 1");
  if (min_samples_split < 2) fail("min_samples_split must be >= 2");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
}

TrainConfig default_config(ModelKind kind) {
  const auto& all = bundled_defaults();
  const auto section = std::string(defaults_section(kind));
  if (!all.contains(section)) throw ConfigError("defaults.json lacks section '" + section + "'");
  auto cfg = config_from_json(all.at(section), TrainConfig{});
  // Optional per-model refinements layered over the family section.
  if (const auto it = all.find("per_model"); it != all.end()) {
    if (const auto m = it->find(std::string(cli_name(kind))); m != it->end()) cfg = config_from_json(*m, cfg);
  }
  return cfg;
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["l2_penalty"] = cfg.l2_penalty;
  j["seed"] = cfg.seed;
  j["hidden_dims"] = cfg.hidden_dims;
  j["embedding_dim"] = cfg.embedding_dim;
  j["max_grad_norm"] = cfg.max_grad_norm ? nlohmann::ordered_json(*cfg.max_grad_norm) : nlohmann::ordered_json(nullptr);
  j["momentum"] = cfg.momentum;
  j["n_trees"] = cfg.n_trees;
  j["max_depth"] = cfg.max_depth;
  j["max_features"] = cfg.max_features ? nlohmann::ordered_json(*cfg.max_features) : nlohmann::ordered_json(nullptr);
  j["bootstrap"] = cfg.bootstrap;
  j["min_samples_split"] = cfg.min_samples_split;
  j["alpha"] = cfg.alpha;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig cfg) {
  const auto count = [](const std::string& key, const nlohmann::json& v) {
    const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!non_negative) throw ConfigError("train config: " + key + " must be a non-negative integer");
    return v.get<std::size_t>();
  };
  const auto counts = [&](const std::string& key, const nlohmann::json& v) {
    if (!v.is_array()) throw ConfigError("train config: " + key + " must be an array");
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(count(key, e));
    return out;
  };
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "learning_rate") cfg.learning_rate = v.get<double>();
      else if (key == "epochs") cfg.epochs = count(key, v);
      else if (key == "batch_size") cfg.batch_size = count(key, v);
      else if (key == "l2_penalty") cfg.l2_penalty = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "hidden_dims") cfg.hidden_dims = counts(key, v);
      else if (key == "embedding_dim") cfg.embedding_dim = count(key, v);
      else if (key == "max_grad_norm") cfg.max_grad_norm = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "momentum") cfg.momentum = v.get<double>();
      else if (key == "n_trees") cfg.n_trees = count(key, v);
      else if (key == "max_depth") cfg.max_depth = count(key, v);
      else if (key == "max_features") cfg.max_features = v.is_null() ? std::nullopt : std::optional(count(key, v));
      else if (key == "bootstrap") cfg.bootstrap = v.get<bool>();
      else if (key == "min_samples_split") cfg.min_samples_split = count(key, v);
      else if (key == "alpha") cfg.alpha = v.get<double>();
      else throw ConfigError("train config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace vaxnet::models
