#include <chrono>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "vaxnet/error.hpp"
#include "vaxnet/io.hpp"
#include "vaxnet/pipeline.hpp"
#include "vaxnet/resources.hpp"

namespace vaxnet::pipeline {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

// Stream ids for derive_seed.
constexpr std::uint64_t kCommunitySeed = 1;
constexpr std::uint64_t kFeatureSeed = 2;
constexpr std::uint64_t kModelSeedBase = 100;

std::size_t model_rank(models::ModelKind k) {
  return static_cast<std::size_t>(std::find(models::kAllModels.begin(), models::kAllModels.end(), k) -
                                  models::kAllModels.begin());
}

models::TrainConfig resolved_train_config(const PipelineConfig& cfg, models::ModelKind kind) {
  auto base = models::default_config(kind);
  base.seed = derive_seed(cfg.seed, kModelSeedBase + model_rank(kind));
  const auto name = std::string(models::cli_name(kind));
  if (cfg.training.contains(name)) return models::config_from_json(cfg.training.at(name), base);
  return base;
}

std::string format_ext(termscatter::Format f) {
  switch (f) {
    case termscatter::Format::tsv: return "tsv";
    case termscatter::Format::json: return "json";
    case termscatter::Format::svg: return "svg";
  }
  return "";
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

/// Hash-checked unit of work.
struct Stage {
  std::string name;
  std::vector<fs::path> inputs;
  ojson params;
  std::vector<fs::path> outputs;
  std::function<ojson()> run;
};

class Runner {
 public:
  Runner(const PipelineConfig& cfg, const RunOptions& options) : cfg_(cfg), options_(options) {
    manifest_path_ = cfg.work_dir / "manifest.json";
    if (!options.force && fs::exists(manifest_path_)) {
      try {
        const auto prev = json::parse(io::read_file(manifest_path_));
        for (const auto& s : prev.at("stages")) previous_[s.at("name").get<std::string>()] = s;
      } catch (const std::exception& e) {
        throw StageError("manifest", std::string("unreadable previous manifest: ") + e.what());
      }
    }
    manifest_["format"] = "vaxnet-manifest";
    manifest_["version"] = kManifestVersion;
    manifest_["vaxnet_version"] = VAXNET_VERSION;
    manifest_["defaults_hash"] = defaults_hash();
    manifest_["started_at"] = now_utc();
    manifest_["finished_at"] = nullptr;
    manifest_["status"] = "running";
    manifest_["config"] = cfg.to_json();
    manifest_["stages"] = ojson::array();
  }

  /// Runs or skips `stage`; returns the stage's recorded result.
  json execute(const Stage& stage, RunResult& result) {
    ojson entry;
    entry["name"] = stage.name;
    ojson inputs = ojson::object();
    std::string key_material = stage.name + "\n" + stage.params.dump() + "\n";
    try {
      for (const auto& in : stage.inputs) {
        if (!fs::exists(in)) throw IoError("missing input " + in.string());
        const auto h = io::sha256_file(in);
        inputs[rel(in)] = h;
        key_material += rel(in) + "\t" + h + "\n";
      }
    } catch (const std::exception& e) {
      fail(entry, stage, e.what());
    }
    const auto key = io::sha256_hex(key_material);
    entry["key"] = key;
    entry["params"] = stage.params;
    entry["inputs"] = inputs;

    if (const auto it = previous_.find(stage.name); it != previous_.end() && cached(it->second, key, stage)) {
      entry["status"] = "skipped";
      entry["outputs"] = it->second.at("outputs");
      entry["result"] = it->second.value("result", json::object());
      manifest_["stages"].push_back(entry);
      result.stages.push_back({stage.name, true});
      log("skip", stage.name);
      return entry["result"];
    }

    ojson out_result;
    try {
      out_result = stage.run();
      ojson outputs = ojson::object();
      for (const auto& o : stage.outputs) {
        if (!fs::exists(o)) throw Error("stage did not produce " + o.string());
        outputs[rel(o)] = io::sha256_file(o);
      }
      entry["status"] = "ran";
      entry["outputs"] = outputs;
      entry["result"] = out_result;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      fail(entry, stage, e.what());
    }
    manifest_["stages"].push_back(entry);
    result.stages.push_back({stage.name, false});
    log("run ", stage.name);
    return entry["result"];
  }

  void finish() {
    manifest_["status"] = "ok";
    manifest_["finished_at"] = now_utc();
    write_manifest();
  }

 private:
  std::string rel(const fs::path& p) const {
    const auto r = p.lexically_relative(cfg_.work_dir);
    if (!r.empty() && *r.begin() != "..") return r.generic_string();
    return p.generic_string();
  }

  /// True when the previous run recorded the same key and every output is
  /// still present and unmodified. A present but modified output aborts.
  bool cached(const json& prev, const std::string& key, const Stage& stage) {
    if (prev.value("key", "") != key) return false;
    const auto status = prev.value("status", "");
    if (status != "ran" && status != "skipped") return false;
    const auto& outputs = prev.at("outputs");
    bool all_present = true;
    for (const auto& o : stage.outputs) {
      const auto name = rel(o);
      if (!outputs.contains(name)) return false;
      if (!fs::exists(o)) {
        all_present = false;
        continue;
      }
      if (io::sha256_file(o) != outputs.at(name).get<std::string>()) {
        throw StageError(stage.name, "output " + name +
                                         " was modified after it was produced (corrupted intermediate); "
                                         "rerun with --force to rebuild");
      }
    }
    return all_present;
  }

  [[noreturn]] void fail(ojson& entry, const Stage& stage, const std::string& cause) {
    entry["status"] = "failed";
    entry["error"] = cause;
    ojson partial = ojson::array();
    for (const auto& o : stage.outputs) {
      if (fs::exists(o)) partial.push_back(rel(o));
    }
    entry["partial_outputs"] = partial;
    manifest_["stages"].push_back(entry);
    manifest_["status"] = "failed";
    manifest_["finished_at"] = now_utc();
    try {
      write_manifest();
    } catch (const std::exception&) {
      // The stage error is the one worth reporting.
    }
    throw StageError(stage.name, cause);
  }

  void write_manifest() { io::write_file(manifest_path_, manifest_.dump(2) + "\n"); }

  void log(std::string_view what, const std::string& name) {
    if (options_.log) *options_.log << what << ' ' << name << '\n';
  }

  const PipelineConfig& cfg_;
  const RunOptions& options_;
  fs::path manifest_path_;
  std::map<std::string, json> previous_;
  ojson manifest_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

}  // namespace

ojson PipelineConfig::to_json() const {
  ojson j;
  j["input"] = input.string();
  j["work_dir"] = work_dir.string();
  j["keywords"] = keywords ? ojson(keywords->string()) : ojson("bundled");
  j["strict"] = strict;
  j["seed"] = seed;
  j["prune_wcc"] = prune_wcc;
  j["community"] = {{"resolution", resolution},
                    {"top_k", top_k},
                    {"seed", derive_seed(seed, kCommunitySeed)},
                    {"antivaxx_id", antivaxx_id ? ojson(*antivaxx_id) : ojson("suggest")},
                    {"marker_hashtags", marker_hashtags}};
  ojson formats = ojson::array();
  for (const auto f : scatter_formats) formats.push_back(format_ext(f));
  j["scatter"] = {{"min_count", scatter.min_count},
                  {"ngram_max", scatter.ngram_max},
                  {"stopwords", scatter.stopwords ? ojson(scatter.stopwords->string()) : ojson("bundled")},
                  {"dictionary", scatter.dictionary ? ojson(scatter.dictionary->string()) : ojson(nullptr)},
                  {"formats", formats}};
  j["features"] = {{"max_len", features.max_len},
                   {"min_df", features.min_df},
                   {"max_size", features.max_size},
                   {"train_fraction", features.train_fraction},
                   {"seed", derive_seed(seed, kFeatureSeed)}};
  ojson names = ojson::array();
  ojson training_echo = ojson::object();
  for (const auto k : models) {
    names.push_back(models::cli_name(k));
    training_echo[std::string(models::cli_name(k))] = models::to_json(resolved_train_config(*this, k));
  }
  j["models"] = names;
  j["training"] = training_echo;
  j["score_model"] = models::cli_name(score_model);
  return j;
}

PipelineConfig parse_pipeline_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  const auto& defaults = bundled_defaults();
  PipelineConfig cfg;
  cfg.features.max_len = defaults.at("features").at("max_len").get<std::size_t>();
  cfg.features.min_df = defaults.at("features").at("min_df").get<std::size_t>();
  cfg.features.max_size = defaults.at("features").at("max_size").get<std::size_t>();
  cfg.features.train_fraction = defaults.at("features").at("train_fraction").get<double>();
  cfg.resolution = defaults.at("community").at("resolution").get<double>();
  cfg.scatter.min_count = defaults.at("scatter").at("min_count").get<std::uint64_t>();
  cfg.scatter.ngram_max = defaults.at("scatter").at("ngram_max").get<std::size_t>();
  cfg.marker_hashtags = community::default_marker_hashtags();
  cfg.models.assign(models::kAllModels.begin(), models::kAllModels.end());

  const auto unknown = [](const std::string& where, const std::string& key) {
    return ConfigError("unknown config key '" + where + key + "'");
  };
  const auto uint_of = [](const json& v, const std::string& key) {
    const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!non_negative) throw ConfigError(key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  };

  // Derived seeds echoed by a manifest; accepted when consistent.
  std::optional<std::uint64_t> echoed_community_seed, echoed_feature_seed;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "input") cfg.input = resolve(base_dir, v.get<std::string>());
      else if (key == "work_dir") cfg.work_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "keywords") {
        if (!v.is_null() && v != "bundled") cfg.keywords = resolve(base_dir, v.get<std::string>());
      } else if (key == "strict") cfg.strict = v.get<bool>();
      else if (key == "seed") cfg.seed = uint_of(v, key);
      else if (key == "prune_wcc") cfg.prune_wcc = v.get<bool>();
      else if (key == "community") {
        for (const auto& [k, c] : v.items()) {
          if (k == "resolution") cfg.resolution = c.get<double>();
          else if (k == "top_k") cfg.top_k = uint_of(c, k);
          else if (k == "antivaxx_id") {
            if (c.is_string() && c == "suggest") cfg.antivaxx_id.reset();
            else if (c.is_number_integer()) cfg.antivaxx_id = c.get<int>();
            else throw ConfigError("community.antivaxx_id must be an integer or \"suggest\"");
          } else if (k == "marker_hashtags") cfg.marker_hashtags = c.get<std::vector<std::string>>();
          else if (k == "seed") echoed_community_seed = uint_of(c, k);
          else throw unknown("community.", k);
        }
      } else if (key == "scatter") {
        cfg.scatter_formats.clear();
        bool formats_given = false;
        for (const auto& [k, c] : v.items()) {
          if (k == "min_count") cfg.scatter.min_count = uint_of(c, k);
          else if (k == "ngram_max") cfg.scatter.ngram_max = uint_of(c, k);
          else if (k == "stopwords") {
            if (!c.is_null() && c != "bundled") cfg.scatter.stopwords = resolve(base_dir, c.get<std::string>());
          } else if (k == "dictionary") {
            if (c == "bundled") cfg.scatter.dictionary = resources::data_dir() / "english_words.txt";
            else if (!c.is_null()) cfg.scatter.dictionary = resolve(base_dir, c.get<std::string>());
          } else if (k == "formats") {
            formats_given = true;
            for (const auto& f : c) cfg.scatter_formats.push_back(termscatter::parse_format(f.get<std::string>()));
          } else throw unknown("scatter.", k);
        }
        if (!formats_given) cfg.scatter_formats = {termscatter::Format::tsv, termscatter::Format::svg};
      } else if (key == "features") {
        for (const auto& [k, c] : v.items()) {
          if (k == "max_len") cfg.features.max_len = uint_of(c, k);
          else if (k == "min_df") cfg.features.min_df = uint_of(c, k);
          else if (k == "max_size") cfg.features.max_size = uint_of(c, k);
          else if (k == "train_fraction") cfg.features.train_fraction = c.get<double>();
          else if (k == "seed") echoed_feature_seed = uint_of(c, k);
          else throw unknown("features.", k);
        }
      } else if (key == "models") {
        cfg.models.clear();
        for (const auto& m : v) cfg.models.push_back(models::parse_model_kind(m.get<std::string>()));
        std::sort(cfg.models.begin(), cfg.models.end(),
                  [](auto a, auto b) { return model_rank(a) < model_rank(b); });
        cfg.models.erase(std::unique(cfg.models.begin(), cfg.models.end()), cfg.models.end());
      } else if (key == "training") {
        if (!v.is_object()) throw ConfigError("training must be an object keyed by model name");
        for (const auto& [k, c] : v.items()) models::parse_model_kind(k);
        cfg.training = v;
      } else if (key == "score_model") cfg.score_model = models::parse_model_kind(v.get<std::string>());
      else throw unknown("", key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (echoed_community_seed && *echoed_community_seed != derive_seed(cfg.seed, kCommunitySeed)) {
    throw ConfigError("community.seed does not follow from the global seed");
  }
  if (echoed_feature_seed && *echoed_feature_seed != derive_seed(cfg.seed, kFeatureSeed)) {
    throw ConfigError("features.seed does not follow from the global seed");
  }
  if (cfg.input.empty()) throw ConfigError("pipeline config: 'input' is required");
  if (cfg.work_dir.empty()) throw ConfigError("pipeline config: 'work_dir' is required");
  if (cfg.models.empty()) throw ConfigError("pipeline config: 'models' must not be empty");
  if (std::find(cfg.models.begin(), cfg.models.end(), cfg.score_model) == cfg.models.end()) {
    throw ConfigError("pipeline config: score_model '" + std::string(models::cli_name(cfg.score_model)) +
                      "' is not among the trained models");
  }
  if (!(cfg.resolution > 0.0)) throw ConfigError("community.resolution must be > 0");
  if (cfg.scatter.min_count < 1) throw ConfigError("scatter.min_count must be >= 1");
  if (cfg.scatter.ngram_max < 1 || cfg.scatter.ngram_max > 2) throw ConfigError("scatter.ngram_max must be 1 or 2");
  if (cfg.features.max_len < 1) throw ConfigError("features.max_len must be >= 1");
  if (cfg.features.min_df < 1) throw ConfigError("features.min_df must be >= 1");
  if (!(cfg.features.train_fraction > 0.0 && cfg.features.train_fraction < 1.0)) {
    throw ConfigError("features.train_fraction must lie in (0, 1)");
  }
  if (cfg.antivaxx_id && *cfg.antivaxx_id < 0) throw ConfigError("community.antivaxx_id must be >= 0");
  // Surfaces invalid training overrides before any stage runs.
  for (const auto k : cfg.models) resolved_train_config(cfg, k);
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_pipeline_config(j, fs::absolute(path).parent_path());
}

RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& options) {
  require_file(cfg.input, "input dataset");
  if (cfg.keywords) require_file(*cfg.keywords, "keyword list");
  if (cfg.scatter.stopwords) require_file(*cfg.scatter.stopwords, "stopword list");
  if (cfg.scatter.dictionary) require_file(*cfg.scatter.dictionary, "dictionary");
  fs::create_directories(cfg.work_dir);

  const auto& W = cfg.work_dir;
  const auto posts = W / "posts.jsonl";
  const auto edges = W / "edges.tsv";
  const auto nodes = W / "nodes.tsv";
  const auto partition = W / "partition.tsv";
  const auto summary = W / "communities.json";
  const auto labels = W / "labels.tsv";
  const auto corpus_path = W / "corpus.jsonl";
  const auto bow = W / "bow.jsonl";
  const auto seq = W / "seq.jsonl";
  const auto vocab = W / "vocab.tsv";
  const auto model_path = [&](models::ModelKind k) { return W / "models" / (std::string(models::cli_name(k)) + ".json"); };
  const auto report_path = [&](models::ModelKind k) { return W / "reports" / (std::string(models::cli_name(k)) + ".json"); };

  Runner runner(cfg, options);
  RunResult result;

  {
    Stage s{"ingest", {cfg.input}, {{"strict", cfg.strict}}, {posts}, {}};
    if (cfg.keywords) s.inputs.push_back(*cfg.keywords);
    s.run = [&] {
      const auto st = ingest(cfg.input, cfg.keywords, cfg.strict, posts);
      return ojson{{"read", st.read}, {"skipped", st.skipped}, {"after_keywords", st.after_keywords},
                   {"after_user_filter", st.after_user_filter}};
    };
    runner.execute(s, result);
  }
  runner.execute({"network", {posts}, {{"prune_wcc", cfg.prune_wcc}}, {edges, nodes},
                  [&] {
                    const auto st = build_network_files(posts, cfg.prune_wcc, edges, nodes);
                    return ojson{{"nodes", st.nodes}, {"edges", st.edges}, {"total_weight", st.total_weight}};
                  }},
                 result);
  const auto community_seed = derive_seed(cfg.seed, kCommunitySeed);
  runner.execute({"communities", {edges, nodes, posts},
                  {{"seed", community_seed}, {"resolution", cfg.resolution}, {"top_k", cfg.top_k},
                   {"marker_hashtags", cfg.marker_hashtags}},
                  {partition, summary},
                  [&] {
                    const auto p = detect_communities(edges, nodes, community_seed, cfg.resolution, partition);
                    const auto sug = summarize(edges, nodes, partition, posts, cfg.top_k, cfg.marker_hashtags, summary);
                    return ojson{{"communities", p.community_count},
                                 {"suggested_antivaxx_id", sug.community},
                                 {"marker_overlap", sug.overlap},
                                 {"no_overlap", sug.no_overlap}};
                  }},
                 result);
  // The suggestion is recomputed so a skipped communities stage leaves
  // nothing to carry over.
  runner.execute({"label", {partition, summary, edges, nodes, posts},
                  {{"antivaxx_id", cfg.antivaxx_id ? ojson(*cfg.antivaxx_id) : ojson("suggest")}},
                  {labels},
                  [&] {
                    int id = 0;
                    bool suggested = false;
                    if (cfg.antivaxx_id) {
                      id = *cfg.antivaxx_id;
                    } else {
                      const auto sug = suggest(edges, nodes, partition, posts, cfg.top_k, cfg.marker_hashtags);
                      if (sug.no_overlap) throw Error("no community shares a marker hashtag; set community.antivaxx_id");
                      id = sug.community;
                      suggested = true;
                    }
                    const auto l = label(partition, id, labels);
                    std::size_t pos = 0;
                    for (const auto& [_, v] : l) pos += v == community::Label::antivaxx ? 1 : 0;
                    return ojson{{"antivaxx_id", id}, {"suggested", suggested}, {"antivaxx", pos},
                                 {"other", l.size() - pos}};
                  }},
                 result);
  runner.execute({"corpus", {posts}, ojson::object(), {corpus_path},
                  [&] { return ojson{{"documents", build_corpus(posts, corpus_path)}}; }},
                 result);
  {
    Stage s{"scatter", {corpus_path, labels}, {}, {}, {}};
    if (cfg.scatter.stopwords) s.inputs.push_back(*cfg.scatter.stopwords);
    if (cfg.scatter.dictionary) s.inputs.push_back(*cfg.scatter.dictionary);
    ojson formats = ojson::array();
    for (const auto f : cfg.scatter_formats) {
      formats.push_back(format_ext(f));
      s.outputs.push_back(W / ("scatter." + format_ext(f)));
    }
    s.params = {{"min_count", cfg.scatter.min_count}, {"ngram_max", cfg.scatter.ngram_max},
                {"stopwords", cfg.scatter.stopwords ? "file" : "bundled"},
                {"dictionary", cfg.scatter.dictionary.has_value()}, {"formats", formats}};
    s.run = [&] {
      const auto stats = scatter(corpus_path, labels, cfg.scatter);
      for (const auto f : cfg.scatter_formats) termscatter::export_scatter(stats, f, W / ("scatter." + format_ext(f)));
      return ojson{{"terms", stats.size()}};
    };
    runner.execute(s, result);
  }

  auto fopts = cfg.features;
  fopts.seed = derive_seed(cfg.seed, kFeatureSeed);
  runner.execute({"featurize", {corpus_path, labels},
                  {{"max_len", fopts.max_len}, {"min_df", fopts.min_df}, {"max_size", fopts.max_size},
                   {"train_fraction", fopts.train_fraction}, {"seed", fopts.seed}},
                  {bow, seq, vocab},
                  [&] {
                    std::vector<corpus::UserDocument> docs;
                    {
                      std::ifstream in(corpus_path, std::ios::binary);
                      docs = corpus::read_corpus(in);
                    }
                    std::ifstream lin(labels, std::ios::binary);
                    const auto l = community::read_labels(lin);
                    auto o = fopts;
                    o.representation = features::Representation::bow;
                    const auto a = featurize(docs, l, o);
                    write_archive(bow, a);
                    o.representation = features::Representation::sequence;
                    write_archive(seq, featurize(docs, l, o));
                    std::ostringstream v;
                    a.vocab.write_tsv(v);
                    io::write_file(vocab, v.str());
                    return ojson{{"vocab_size", a.vocab.size()}, {"train", a.bow_train.size()}, {"test", a.bow_test.size()}};
                  }},
                 result);

  const auto archive_for = [&](models::ModelKind k) {
    return models::representation(k) == features::Representation::bow ? bow : seq;
  };
  for (const auto k : cfg.models) {
    const auto tc = resolved_train_config(cfg, k);
    runner.execute({"train:" + std::string(models::cli_name(k)), {archive_for(k)}, models::to_json(tc), {model_path(k)},
                    [&, k, tc] {
                      const auto f = train(read_archive(archive_for(k)), k, tc);
                      models::write_model(model_path(k), f);
                      return ojson::object();
                    }},
                   result);
  }

  {
    Stage s{"evaluate", {bow, seq}, ojson::object(), {W / "report.json", W / "table.md"}, {}};
    for (const auto k : cfg.models) {
      s.inputs.push_back(model_path(k));
      s.outputs.push_back(report_path(k));
    }
    s.run = [&] {
      const auto bow_archive = read_archive(bow);
      const auto seq_archive = read_archive(seq);
      std::vector<eval::ModelResult> rows;
      ojson summary_rows = ojson::object();
      for (const auto k : cfg.models) {
        const auto f = models::read_model(model_path(k));
        auto row = evaluate(f, models::representation(k) == features::Representation::bow ? bow_archive : seq_archive);
        io::write_file(report_path(k), eval::to_json(eval::build_report({row})).dump(2) + "\n");
        summary_rows[std::string(models::cli_name(k))] = {{"accuracy", row.accuracy}, {"auc", row.auc}};
        rows.push_back(std::move(row));
      }
      const auto report = eval::build_report(std::move(rows));
      io::write_file(W / "report.json", eval::to_json(report).dump(2) + "\n");
      io::write_file(W / "table.md", eval::to_markdown(report));
      return summary_rows;
    };
    runner.execute(s, result);
  }

  runner.execute({"score", {model_path(cfg.score_model), corpus_path},
                  {{"model", models::cli_name(cfg.score_model)}}, {W / "scores.tsv"},
                  [&] {
                    std::ifstream in(corpus_path, std::ios::binary);
                    const auto docs = corpus::read_corpus(in);
                    io::write_file(W / "scores.tsv", score_corpus(models::read_model(model_path(cfg.score_model)), docs));
                    return ojson{{"documents", docs.size()}};
                  }},
                 result);

  runner.finish();
  return result;
}

}  // namespace vaxnet::pipeline
