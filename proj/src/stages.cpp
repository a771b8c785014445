#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "vaxnet/error.hpp"
#include "vaxnet/graph.hpp"
#include "vaxnet/ingest.hpp"
#include "vaxnet/io.hpp"
#include "vaxnet/pipeline.hpp"
#include "vaxnet/resources.hpp"

namespace vaxnet::pipeline {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kArchiveVersion = 1;

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

ingest::Dataset load_dataset(const fs::path& path) {
  try {
    return ingest::read_dataset(path.string(), true).dataset;
  } catch (const ParseError& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<corpus::UserDocument> load_corpus(const fs::path& path) {
  auto in = open_in(path);
  try {
    return corpus::read_corpus(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

community::BinaryLabels load_labels(const fs::path& path) {
  auto in = open_in(path);
  try {
    return community::read_labels(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

community::Partition load_partition(const fs::path& path) {
  auto in = open_in(path);
  try {
    return community::read_partition(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::unordered_set<std::string> word_set(const std::vector<std::string>& lines) {
  return {lines.begin(), lines.end()};
}

ojson bow_json(const features::BowVector& x) {
  ojson arr = ojson::array();
  for (const auto& e : x) arr.push_back({e.index, e.count});
  return arr;
}

}  // namespace

const nlohmann::json& bundled_defaults() {
  static const json j = [] {
    try {
      return json::parse(resources::load("defaults.json"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("defaults.json: ") + e.what());
    }
  }();
  return j;
}

std::string defaults_hash() { return io::sha256_hex(resources::load("defaults.json")); }

IngestStats ingest(const fs::path& input, const std::optional<fs::path>& keywords, bool strict,
                   const fs::path& out) {
  auto parsed = ingest::read_dataset(input.string(), strict);
  IngestStats stats;
  stats.skipped = parsed.skipped;
  stats.read = parsed.dataset.posts.size();
  const auto filter = keywords ? ingest::KeywordFilter::from_file(keywords->string()) : ingest::KeywordFilter::bundled();
  const auto kept = ingest::filter_by_keywords(parsed.dataset, filter);
  stats.after_keywords = kept.posts.size();
  const auto final = ingest::filter_retweet_only_users(kept);
  stats.after_user_filter = final.posts.size();
  std::ostringstream ss;
  ingest::write_dataset(ss, final);
  io::write_file(out, ss.str());
  return stats;
}

graph::NetworkStats build_network_files(const fs::path& dataset, bool prune_wcc, const fs::path& edges_out,
                                        const std::optional<fs::path>& nodes_out) {
  auto g = graph::build_network(load_dataset(dataset));
  if (prune_wcc) g = graph::principal_wcc(g);
  std::ostringstream edges;
  graph::write_edges(edges, g);
  io::write_file(edges_out, edges.str());
  if (nodes_out) {
    std::ostringstream nodes;
    graph::write_nodes(nodes, g);
    io::write_file(*nodes_out, nodes.str());
  }
  return graph::network_stats(g);
}

graph::RetweetNetwork load_network(const fs::path& edges, const std::optional<fs::path>& nodes) {
  auto edge_in = open_in(edges);
  try {
    if (nodes) {
      auto node_in = open_in(*nodes);
      return graph::read_network(edge_in, &node_in);
    }
    return graph::read_network(edge_in);
  } catch (const ParseError& e) {
    throw Error(edges.string() + ": " + e.what());
  }
}

community::Partition detect_communities(const fs::path& edges, const std::optional<fs::path>& nodes,
                                        std::uint64_t seed, double resolution, const fs::path& out) {
  const auto g = load_network(edges, nodes);
  if (g.node_count() == 0) throw Error("network is empty");
  const auto p = community::louvain(g, seed, resolution);
  std::ostringstream ss;
  community::write_partition(ss, p);
  io::write_file(out, ss.str());
  return p;
}

community::Suggestion summarize(const fs::path& edges, const std::optional<fs::path>& nodes,
                                const fs::path& partition, const fs::path& dataset, std::size_t top_k,
                                const std::vector<std::string>& markers, const fs::path& out) {
  const auto g = load_network(edges, nodes);
  const auto p = load_partition(partition);
  const auto summaries = community::summarize_communities(g, p, load_dataset(dataset), top_k);
  io::write_file(out, community::summaries_to_json(summaries));
  return community::suggest_antivaxx_community(summaries, markers);
}

community::Suggestion suggest(const fs::path& edges, const std::optional<fs::path>& nodes,
                              const fs::path& partition, const fs::path& dataset, std::size_t top_k,
                              const std::vector<std::string>& markers) {
  const auto summaries =
      community::summarize_communities(load_network(edges, nodes), load_partition(partition), load_dataset(dataset), top_k);
  return community::suggest_antivaxx_community(summaries, markers);
}

community::BinaryLabels label(const fs::path& partition, int antivaxx_id, const fs::path& out) {
  const auto labels = community::label_binary(load_partition(partition), antivaxx_id);
  std::ostringstream ss;
  community::write_labels(ss, labels);
  io::write_file(out, ss.str());
  return labels;
}

std::size_t build_corpus(const fs::path& dataset, const fs::path& out) {
  const auto docs = corpus::build_documents(load_dataset(dataset));
  std::ostringstream ss;
  corpus::write_corpus(ss, docs);
  io::write_file(out, ss.str());
  return docs.size();
}

std::vector<termscatter::TermStats> scatter(const fs::path& corpus_path, const fs::path& labels_path,
                                            const ScatterOptions& options) {
  const auto docs = load_corpus(corpus_path);
  const auto labels = load_labels(labels_path);
  std::vector<corpus::UserDocument> kept;
  std::vector<int> positive;
  for (const auto& d : docs) {
    const auto it = labels.find(d.author_id);
    if (it == labels.end()) continue;
    kept.push_back(d);
    positive.push_back(it->second == community::Label::antivaxx ? 1 : 0);
  }
  termscatter::CountOptions co;
  co.min_count = options.min_count;
  co.ngram_max = options.ngram_max;
  co.stopwords = word_set(options.stopwords ? resources::read_lines(*options.stopwords)
                                            : resources::load_lines("stopwords.txt"));
  if (options.dictionary) co.dictionary = word_set(resources::read_lines(*options.dictionary));
  const auto counts = termscatter::count_terms(kept, positive, co);
  return termscatter::compute_coordinates(counts);
}

// ---------------------------------------------------------------------------

FeatureArchive featurize(std::span<const corpus::UserDocument> docs, const community::BinaryLabels& labels,
                         const FeatureOptions& options) {
  if (options.max_len < 1) throw ConfigError("max_len must be >= 1");
  const auto sample = features::balanced_sample(docs, labels, derive_seed(options.seed, 0));
  const auto [train, test] = features::train_test_split(sample, options.train_fraction, derive_seed(options.seed, 1));
  FeatureArchive a;
  a.options = options;
  a.vocab = features::build_vocabulary(train.samples, options.min_df, options.max_size);
  if (options.representation == features::Representation::bow) {
    a.bow_train = train.map([&](const corpus::UserDocument& d) { return features::vectorize_bow(d, a.vocab); });
    a.bow_test = test.map([&](const corpus::UserDocument& d) { return features::vectorize_bow(d, a.vocab); });
  } else {
    const auto enc = [&](const corpus::UserDocument& d) { return features::encode_sequence(d, a.vocab, options.max_len); };
    a.seq_train = train.map(enc);
    a.seq_test = test.map(enc);
  }
  return a;
}

void write_archive(const fs::path& path, const FeatureArchive& a) {
  const bool bow = a.options.representation == features::Representation::bow;
  ojson header;
  header["format"] = "vaxnet-features";
  header["version"] = kArchiveVersion;
  header["representation"] = features::name(a.options.representation);
  header["vocab_size"] = a.vocab.size();
  header["vocab_hash"] = a.vocab.hash();
  header["max_len"] = a.options.max_len;
  header["min_df"] = a.options.min_df;
  header["max_size"] = a.options.max_size;
  header["train_fraction"] = a.options.train_fraction;
  header["seed"] = a.options.seed;
  header["vocabulary"] = a.vocab.tokens();
  std::string out = header.dump() + "\n";
  const auto emit = [&](const auto& set, std::string_view split) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      ojson rec;
      rec["author_id"] = set.authors[i];
      rec["label"] = set.labels[i];
      rec["split"] = split;
      if constexpr (std::is_same_v<std::decay_t<decltype(set.samples[i])>, features::BowVector>) {
        rec["bow"] = bow_json(set.samples[i]);
      } else {
        rec["ids"] = set.samples[i].ids;
      }
      out += rec.dump() + "\n";
    }
  };
  if (bow) {
    emit(a.bow_train, "train");
    emit(a.bow_test, "test");
  } else {
    emit(a.seq_train, "train");
    emit(a.seq_test, "test");
  }
  io::write_file(path, out);
}

FeatureArchive read_archive(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) -> Error {
    return Error(path.string() + ": " + ParseError(line_no, what).what());
  };
  FeatureArchive a;
  try {
    if (!std::getline(in, line)) throw Error(path.string() + ": empty feature archive");
    ++line_no;
    const auto h = json::parse(line);
    if (h.at("format") != "vaxnet-features" || h.at("version").get<int>() != kArchiveVersion) {
      throw fail("not a feature archive");
    }
    a.options.representation = features::parse_representation(h.at("representation").get<std::string>());
    a.options.max_len = h.at("max_len").get<std::size_t>();
    a.options.min_df = h.at("min_df").get<std::size_t>();
    a.options.max_size = h.at("max_size").get<std::size_t>();
    a.options.train_fraction = h.at("train_fraction").get<double>();
    a.options.seed = h.at("seed").get<std::uint64_t>();
    a.vocab = features::Vocabulary(h.at("vocabulary").get<std::vector<std::string>>());
    if (a.vocab.hash() != h.at("vocab_hash").get<std::string>() || a.vocab.size() != h.at("vocab_size").get<std::size_t>()) {
      throw fail("vocabulary does not match its hash");
    }
    const bool bow = a.options.representation == features::Representation::bow;
    const auto V = static_cast<std::int64_t>(a.vocab.size());
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto r = json::parse(line);
      const auto author = r.at("author_id").get<std::string>();
      const int label = r.at("label").get<int>();
      if (label != 0 && label != 1) throw fail("label must be 0 or 1");
      const auto split = r.at("split").get<std::string>();
      if (split != "train" && split != "test") throw fail("split must be train or test");
      if (bow) {
        features::BowVector x;
        for (const auto& e : r.at("bow")) {
          const auto idx = e.at(0).get<std::int64_t>();
          const auto count = e.at(1).get<std::int64_t>();
          if (idx < 0 || idx >= V || count < 1 || (!x.empty() && idx <= x.back().index)) {
            throw fail("malformed bag-of-words entry");
          }
          x.push_back({static_cast<std::int32_t>(idx), static_cast<std::uint32_t>(count)});
        }
        (split == "train" ? a.bow_train : a.bow_test).push_back(std::move(x), label, author);
      } else {
        features::SequenceSample s;
        for (const auto& e : r.at("ids")) {
          const auto id = e.get<std::int64_t>();
          if (id < 0 || id >= V) throw fail("token id outside the vocabulary");
          s.ids.push_back(static_cast<std::int32_t>(id));
        }
        if (s.ids.size() != a.options.max_len) throw fail("sequence length differs from max_len");
        (split == "train" ? a.seq_train : a.seq_test).push_back(std::move(s), label, author);
      }
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  return a;
}

models::ModelFile train(const FeatureArchive& a, models::ModelKind kind, const models::TrainConfig& cfg) {
  if (models::representation(kind) != a.options.representation) {
    throw Error(fmt::format("model {} needs {} features, archive holds {}", models::cli_name(kind),
                            features::name(models::representation(kind)), features::name(a.options.representation)));
  }
  models::ModelFile f;
  f.vocab = a.vocab;
  f.max_len = a.options.max_len;
  f.model = a.options.representation == features::Representation::bow
                ? models::train_model(kind, a.bow_train, a.vocab.size(), cfg)
                : models::train_model(kind, a.seq_train, a.vocab.size(), cfg);
  return f;
}

eval::ModelResult evaluate(const models::ModelFile& model, const FeatureArchive& a) {
  if (model.vocab.hash() != a.vocab.hash()) throw Error("model and feature archive use different vocabularies");
  const auto kind = model.model.kind;
  const auto scores = a.options.representation == features::Representation::bow
                          ? models::predict_scores(model.model, a.bow_test)
                          : models::predict_scores(model.model, a.seq_test);
  const auto& labels = a.options.representation == features::Representation::bow ? a.bow_test.labels : a.seq_test.labels;
  return eval::evaluate(kind, scores, labels, model.model.config.seed, models::to_json(model.model.config));
}

std::string score_corpus(const models::ModelFile& model, std::span<const corpus::UserDocument> docs) {
  std::string out = "author_id\tscore\n";
  const bool bow = models::representation(model.model.kind) == features::Representation::bow;
  for (const auto& d : docs) {
    const double s = bow ? models::predict_score(model.model, features::vectorize_bow(d, model.vocab))
                         : models::predict_score(model.model, features::encode_sequence(d, model.vocab, model.max_len));
    out += fmt::format("{}\t{}\n", d.author_id, s);
  }
  return out;
}

}  // namespace vaxnet::pipeline
