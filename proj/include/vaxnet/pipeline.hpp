#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaxnet/community.hpp"
#include "vaxnet/eval.hpp"
#include "vaxnet/features.hpp"
#include "vaxnet/models.hpp"
#include "vaxnet/termscatter.hpp"

namespace vaxnet::pipeline {

namespace fs = std::filesystem;

/// SHA-256 of the bundled defaults.json actually in use.
std::string defaults_hash();
/// Parsed bundled defaults.json.
const nlohmann::json& bundled_defaults();

// ---------------------------------------------------------------------------
// Stages. Each reads its inputs from files and writes its outputs atomically;
// the command-line subcommands and run_pipeline share them.

struct IngestStats {
  std::size_t read = 0;
  std::size_t skipped = 0;
  std::size_t after_keywords = 0;
  std::size_t after_user_filter = 0;
};

/// Parse, keyword filter, drop retweet-only users.
IngestStats ingest(const fs::path& input, const std::optional<fs::path>& keywords, bool strict,
                   const fs::path& out);

/// Builds the retweet network, optionally pruned to its principal WCC.
graph::NetworkStats build_network_files(const fs::path& dataset, bool prune_wcc, const fs::path& edges_out,
                                        const std::optional<fs::path>& nodes_out);

graph::RetweetNetwork load_network(const fs::path& edges, const std::optional<fs::path>& nodes);

community::Partition detect_communities(const fs::path& edges, const std::optional<fs::path>& nodes,
                                        std::uint64_t seed, double resolution, const fs::path& out);

/// Writes the community summary JSON and returns the marker-hashtag
/// suggestion.
community::Suggestion summarize(const fs::path& edges, const std::optional<fs::path>& nodes,
                                const fs::path& partition, const fs::path& dataset, std::size_t top_k,
                                const std::vector<std::string>& markers, const fs::path& out);

/// The marker-hashtag suggestion alone.
community::Suggestion suggest(const fs::path& edges, const std::optional<fs::path>& nodes,
                              const fs::path& partition, const fs::path& dataset, std::size_t top_k,
                              const std::vector<std::string>& markers);

community::BinaryLabels label(const fs::path& partition, int antivaxx_id, const fs::path& out);

std::size_t build_corpus(const fs::path& dataset, const fs::path& out);

struct ScatterOptions {
  std::uint64_t min_count = 1;
  std::size_t ngram_max = 2;
  /// Bundled list when unset.
  std::optional<fs::path> stopwords;
  std::optional<fs::path> dictionary;
};

std::vector<termscatter::TermStats> scatter(const fs::path& corpus, const fs::path& labels,
                                            const ScatterOptions& options);

// ---------------------------------------------------------------------------
// Featurized archives

struct FeatureOptions {
  features::Representation representation = features::Representation::bow;
  std::size_t max_len = 256;
  std::size_t min_df = 2;
  std::size_t max_size = 20000;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Balanced, split and vectorized documents. The vocabulary is built on the
/// training split only.
struct FeatureArchive {
  FeatureOptions options;
  features::Vocabulary vocab;
  features::LabeledSet<features::BowVector> bow_train, bow_test;
  features::LabeledSet<features::SequenceSample> seq_train, seq_test;
};

FeatureArchive featurize(std::span<const corpus::UserDocument> docs, const community::BinaryLabels& labels,
                         const FeatureOptions& options);
void write_archive(const fs::path& path, const FeatureArchive& archive);
FeatureArchive read_archive(const fs::path& path);

/// Trains `kind` on the archive's training split.
models::ModelFile train(const FeatureArchive& archive, models::ModelKind kind, const models::TrainConfig& cfg);

/// Evaluates on the archive's test split.
eval::ModelResult evaluate(const models::ModelFile& model, const FeatureArchive& archive);

/// `author_id<TAB>score` for every document, in corpus order.
std::string score_corpus(const models::ModelFile& model, std::span<const corpus::UserDocument> docs);

// ---------------------------------------------------------------------------
// Orchestration

struct PipelineConfig {
  fs::path input;
  fs::path work_dir;
  std::optional<fs::path> keywords;
  bool strict = false;
  std::uint64_t seed = 0;
  bool prune_wcc = true;
  double resolution = 1.0;
  std::size_t top_k = 10;
  /// Community id, or unset to take the marker-hashtag suggestion.
  std::optional<int> antivaxx_id;
  std::vector<std::string> marker_hashtags;
  ScatterOptions scatter;
  std::vector<termscatter::Format> scatter_formats{termscatter::Format::tsv, termscatter::Format::svg};
  FeatureOptions features;
  std::vector<models::ModelKind> models;
  /// Per-model TrainConfig overrides, keyed by command-line model name.
  nlohmann::json training = nlohmann::json::object();
  models::ModelKind score_model = models::ModelKind::lstm;

  /// Fully resolved configuration (defaults filled in), as echoed in the
  /// manifest. Paths are absolute.
  nlohmann::ordered_json to_json() const;
};

/// Parses a JSON config; relative paths resolve against `base_dir`. Throws
/// ConfigError.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const fs::path& base_dir);
PipelineConfig load_pipeline_config(const fs::path& path);

struct RunOptions {
  /// Ignore the manifest and rerun every stage.
  bool force = false;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

struct StageOutcome {
  std::string name;
  bool skipped = false;
};

struct RunResult {
  std::vector<StageOutcome> stages;
};

/// Thrown when a stage fails; the message names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Runs ingest, network, communities, label, corpus, scatter, featurize,
/// train, evaluate and score in order, skipping stages whose recorded inputs
/// and outputs are unchanged. Writes manifest.json into the work directory.
RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& options = {});

}  // namespace vaxnet::pipeline
