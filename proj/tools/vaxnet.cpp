// Command-line front end: one subcommand per pipeline stage plus `pipeline`
// for the whole run.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vaxnet/error.hpp"
#include "vaxnet/ingest.hpp"
#include "vaxnet/io.hpp"
#include "vaxnet/pipeline.hpp"

namespace {

using namespace vaxnet;
namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

std::optional<fs::path> opt_path(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<fs::path>(s);
}

std::vector<corpus::UserDocument> read_corpus_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return corpus::read_corpus(in);
}

community::BinaryLabels read_labels_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return community::read_labels(in);
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::write_file(path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vaxnet: retweet-network communities and anti-vaccination language classifiers"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version and defaults hash");

  std::function<void()> action;

  // ingest
  struct {
    std::string input, keywords, out;
    bool strict = false;
  } ing;
  auto* c_ingest = app.add_subcommand("ingest", "Parse, keyword-filter and triage a post dataset");
  c_ingest->add_option("--input", ing.input, "Input .jsonl")->required();
  c_ingest->add_option("--keywords", ing.keywords, "Keyword list (default: bundled)");
  c_ingest->add_flag("--strict", ing.strict, "Fail on the first malformed line");
  c_ingest->add_option("--out", ing.out, "Output .jsonl")->required();
  c_ingest->callback([&] {
    action = [&] {
      const auto st = pipeline::ingest(ing.input, opt_path(ing.keywords), ing.strict, ing.out);
      std::cerr << fmt::format("read {} posts ({} skipped), {} after keyword filter, {} after dropping retweet-only users\n",
                               st.read, st.skipped, st.after_keywords, st.after_user_filter);
    };
  });

  // synth
  struct {
    std::string config, out;
    std::uint64_t seed = 1;
  } syn;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted communities");
  c_synth->add_option("--config", syn.config, "Generator config JSON");
  c_synth->add_option("--seed", syn.seed, "Seed")->required();
  c_synth->add_option("--out", syn.out, "Output .jsonl (ground truth goes to <out>.truth.tsv)")->required();
  c_synth->callback([&] {
    action = [&] {
      const auto cfg = syn.config.empty() ? ingest::SynthConfig{} : ingest::synth_config_from_json(io::read_file(syn.config));
      const auto data = ingest::generate_synthetic(cfg, syn.seed);
      std::ostringstream ss;
      ingest::write_dataset(ss, data.dataset);
      io::write_file(syn.out, ss.str());
      std::string truth;
      for (const auto& [author, c] : data.planted) truth += fmt::format("{}\t{}\n", author, c);
      io::write_file(syn.out + ".truth.tsv", truth);
      std::cerr << fmt::format("{} posts by {} users\n", data.dataset.posts.size(), data.planted.size());
    };
  });

  // top-authors
  struct {
    std::string input, by = "retweets";
    std::size_t n = 50;
  } top;
  auto* c_top = app.add_subcommand("top-authors", "List the most active or most retweeted authors");
  c_top->add_option("--input", top.input, "Dataset .jsonl")->required();
  c_top->add_option("--n", top.n, "Number of authors")->check(CLI::PositiveNumber);
  c_top->add_option("--by", top.by, "Ranking")->check(CLI::IsMember({"retweets", "originals"}));
  c_top->callback([&] {
    action = [&] {
      const auto d = ingest::read_dataset(top.input, true).dataset;
      const auto by = top.by == "retweets" ? ingest::RankBy::times_retweeted : ingest::RankBy::originals;
      for (const auto& [author, count] : ingest::top_authors(d, top.n, by)) std::cout << author << '\t' << count << '\n';
    };
  });

  // network
  struct {
    std::string input, out, nodes_out;
    bool prune = false;
  } net;
  auto* c_net = app.add_subcommand("network", "Build the weighted retweet network");
  c_net->add_option("--input", net.input, "Dataset .jsonl")->required();
  c_net->add_option("--out", net.out, "Edge list TSV")->required();
  c_net->add_option("--nodes-out", net.nodes_out, "Node metadata TSV");
  c_net->add_flag("--prune-wcc", net.prune, "Keep only the principal weakly connected component");
  c_net->callback([&] {
    action = [&] {
      const auto st = pipeline::build_network_files(net.input, net.prune, net.out, opt_path(net.nodes_out));
      std::cerr << fmt::format("{} nodes, {} edges, total weight {}\n", st.nodes, st.edges, st.total_weight);
    };
  });

  // communities
  struct {
    std::string edges, nodes, out, dataset, summary;
    std::uint64_t seed = 0;
    double resolution = 1.0;
    std::size_t top_k = 10;
  } com;
  auto* c_com = app.add_subcommand("communities", "Louvain community detection");
  c_com->add_option("--edges", com.edges, "Edge list TSV")->required();
  c_com->add_option("--nodes", com.nodes, "Node metadata TSV");
  c_com->add_option("--seed", com.seed, "Seed")->required();
  c_com->add_option("--resolution", com.resolution, "Modularity resolution")->check(CLI::PositiveNumber);
  c_com->add_option("--out", com.out, "Partition TSV")->required();
  c_com->add_option("--dataset", com.dataset, "Dataset .jsonl, for the community summary");
  c_com->add_option("--summary", com.summary, "Community summary JSON (needs --dataset)");
  c_com->add_option("--top-k", com.top_k, "Hashtags and verified accounts per community");
  c_com->callback([&] {
    action = [&] {
      const auto p = pipeline::detect_communities(com.edges, opt_path(com.nodes), com.seed, com.resolution, com.out);
      std::cerr << fmt::format("{} communities\n", p.community_count);
      if (!com.summary.empty()) {
        if (com.dataset.empty()) throw ConfigError("--summary needs --dataset");
        const auto s = pipeline::summarize(com.edges, opt_path(com.nodes), com.out, com.dataset, com.top_k,
                                           community::default_marker_hashtags(), com.summary);
        if (s.no_overlap) {
          std::cerr << "warning: no community shares a marker hashtag; suggestion defaults to 0\n";
        }
        std::cerr << fmt::format("suggested antivaxx community: {} ({} marker hashtags)\n", s.community, s.overlap);
      }
    };
  });

  // label
  struct {
    std::string partition, out;
    int id = -1;
  } lab;
  auto* c_label = app.add_subcommand("label", "Binary Antivaxx/Other labels from a partition");
  c_label->add_option("--partition", lab.partition, "Partition TSV")->required();
  c_label->add_option("--antivaxx-id", lab.id, "Antivaxx community id")->required();
  c_label->add_option("--out", lab.out, "Labels TSV (default: stdout)");
  c_label->callback([&] {
    action = [&] {
      std::ifstream in(lab.partition, std::ios::binary);
      if (!in) throw IoError("cannot open " + lab.partition);
      const auto labels = community::label_binary(community::read_partition(in), lab.id);
      std::ostringstream ss;
      community::write_labels(ss, labels);
      write_or_print(lab.out, ss.str());
    };
  });

  // corpus
  struct {
    std::string input, out;
  } cor;
  auto* c_corpus = app.add_subcommand("corpus", "One token document per author");
  c_corpus->add_option("--input", cor.input, "Dataset .jsonl")->required();
  c_corpus->add_option("--out", cor.out, "Corpus .jsonl")->required();
  c_corpus->callback([&] {
    action = [&] { std::cerr << pipeline::build_corpus(cor.input, cor.out) << " documents\n"; };
  });

  // scatter
  struct {
    std::string corpus, labels, stopwords, dictionary, format = "svg", out;
    std::uint64_t min_count = 1;
    std::size_t ngram_max = 2;
  } sca;
  auto* c_scatter = app.add_subcommand("scatter", "Term-association scatter data");
  c_scatter->add_option("--corpus", sca.corpus, "Corpus .jsonl")->required();
  c_scatter->add_option("--labels", sca.labels, "Labels TSV")->required();
  c_scatter->add_option("--min-count", sca.min_count, "Minimum total occurrences")->check(CLI::PositiveNumber);
  c_scatter->add_option("--ngram-max", sca.ngram_max, "1 for unigrams, 2 to add bigrams")->check(CLI::Range(1, 2));
  c_scatter->add_option("--stopwords", sca.stopwords, "Stopword list (default: bundled)");
  c_scatter->add_option("--dictionary", sca.dictionary, "Word list; other word unigrams are dropped");
  c_scatter->add_option("--format", sca.format, "Output format")->check(CLI::IsMember({"tsv", "json", "svg"}));
  c_scatter->add_option("--out", sca.out, "Output path")->required();
  c_scatter->callback([&] {
    action = [&] {
      pipeline::ScatterOptions o;
      o.min_count = sca.min_count;
      o.ngram_max = sca.ngram_max;
      o.stopwords = opt_path(sca.stopwords);
      o.dictionary = opt_path(sca.dictionary);
      const auto stats = pipeline::scatter(sca.corpus, sca.labels, o);
      termscatter::export_scatter(stats, termscatter::parse_format(sca.format), sca.out);
      std::cerr << stats.size() << " terms\n";
    };
  });

  // featurize
  struct {
    std::string corpus, labels, repr = "bow", out, vocab_out;
    pipeline::FeatureOptions o;
  } fea;
  auto* c_feat = app.add_subcommand("featurize", "Balanced sample, split and vectorize documents");
  c_feat->add_option("--corpus", fea.corpus, "Corpus .jsonl")->required();
  c_feat->add_option("--labels", fea.labels, "Labels TSV")->required();
  c_feat->add_option("--repr", fea.repr, "Representation")->check(CLI::IsMember({"bow", "seq"}));
  c_feat->add_option("--max-len", fea.o.max_len, "Sequence length")->check(CLI::PositiveNumber);
  c_feat->add_option("--min-df", fea.o.min_df, "Minimum document frequency")->check(CLI::PositiveNumber);
  c_feat->add_option("--max-size", fea.o.max_size, "Maximum vocabulary size");
  c_feat->add_option("--train-fraction", fea.o.train_fraction, "Training share")->check(CLI::Range(0.0, 1.0));
  c_feat->add_option("--seed", fea.o.seed, "Seed")->required();
  c_feat->add_option("--out", fea.out, "Feature archive .jsonl")->required();
  c_feat->add_option("--vocab-out", fea.vocab_out, "Vocabulary TSV");
  c_feat->callback([&] {
    action = [&] {
      fea.o.representation = features::parse_representation(fea.repr);
      const auto a = pipeline::featurize(read_corpus_file(fea.corpus), read_labels_file(fea.labels), fea.o);
      pipeline::write_archive(fea.out, a);
      if (!fea.vocab_out.empty()) {
        std::ostringstream ss;
        a.vocab.write_tsv(ss);
        io::write_file(fea.vocab_out, ss.str());
      }
      const auto n_train = a.bow_train.size() + a.seq_train.size();
      const auto n_test = a.bow_test.size() + a.seq_test.size();
      std::cerr << fmt::format("vocabulary {}, {} train, {} test\n", a.vocab.size(), n_train, n_test);
    };
  });

  // train
  struct {
    std::string data, model, config, out;
    std::uint64_t seed = 0;
  } tr;
  auto* c_train = app.add_subcommand("train", "Train a classifier on a feature archive");
  c_train->add_option("--data", tr.data, "Feature archive")->required();
  c_train->add_option("--model", tr.model, "logreg|hinge|nb|rf|dnn-bow|dnn-seq|gru|lstm")->required();
  c_train->add_option("--config", tr.config, "TrainConfig overrides (JSON)");
  c_train->add_option("--seed", tr.seed, "Seed")->required();
  c_train->add_option("--out", tr.out, "Model file")->required();
  c_train->callback([&] {
    action = [&] {
      const auto kind = models::parse_model_kind(tr.model);
      auto cfg = models::default_config(kind);
      if (!tr.config.empty()) {
        json j;
        try {
          j = json::parse(io::read_file(tr.config));
        } catch (const json::exception& e) {
          throw ConfigError(tr.config + ": " + e.what());
        }
        cfg = models::config_from_json(j, cfg);
      }
      cfg.seed = tr.seed;
      models::write_model(tr.out, pipeline::train(pipeline::read_archive(tr.data), kind, cfg));
    };
  });

  // score
  struct {
    std::string model, corpus, out;
  } sc;
  auto* c_score = app.add_subcommand("score", "Score every document of a corpus");
  c_score->add_option("--model", sc.model, "Model file")->required();
  c_score->add_option("--corpus", sc.corpus, "Corpus .jsonl")->required();
  c_score->add_option("--out", sc.out, "Scores TSV (default: stdout)");
  c_score->callback([&] {
    action = [&] { write_or_print(sc.out, pipeline::score_corpus(models::read_model(sc.model), read_corpus_file(sc.corpus))); };
  });

  // evaluate
  struct {
    std::string model, data, out;
  } ev;
  auto* c_eval = app.add_subcommand("evaluate", "Accuracy, AUC and ROC on the test split");
  c_eval->add_option("--model", ev.model, "Model file")->required();
  c_eval->add_option("--data", ev.data, "Feature archive")->required();
  c_eval->add_option("--out", ev.out, "Report JSON")->required();
  c_eval->callback([&] {
    action = [&] {
      const auto row = pipeline::evaluate(models::read_model(ev.model), pipeline::read_archive(ev.data));
      io::write_file(ev.out, eval::to_json(eval::build_report({row})).dump(2) + "\n");
      std::cerr << fmt::format("{}: accuracy {:.4f}, AUC {:.4f}\n", models::cli_name(row.kind), row.accuracy, row.auc);
    };
  });

  // report
  struct {
    std::vector<std::string> inputs;
    std::string out, json_out;
  } rep;
  auto* c_report = app.add_subcommand("report", "Merge evaluation reports into a results table");
  c_report->add_option("--inputs", rep.inputs, "Report JSON files")->required();
  c_report->add_option("--out", rep.out, "Markdown table (default: stdout)");
  c_report->add_option("--json-out", rep.json_out, "Merged report JSON");
  c_report->callback([&] {
    action = [&] {
      std::vector<eval::EvalReport> reports;
      for (const auto& p : rep.inputs) {
        try {
          reports.push_back(eval::report_from_json(json::parse(io::read_file(p))));
        } catch (const json::exception& e) {
          throw Error(p + ": " + e.what());
        }
      }
      const auto merged = eval::merge_reports(reports);
      write_or_print(rep.out, eval::to_markdown(merged));
      if (!rep.json_out.empty()) io::write_file(rep.json_out, eval::to_json(merged).dump(2) + "\n");
    };
  });

  // pipeline
  struct {
    std::string config, work_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> antivaxx_id;
    bool force = false, quiet = false;
  } pl;
  auto* c_pipe = app.add_subcommand("pipeline", "Run every stage from one config file");
  c_pipe->add_option("--config", pl.config, "Pipeline config JSON")->required();
  c_pipe->add_option("--seed", pl.seed, "Global seed (overrides the config)");
  c_pipe->add_option("--antivaxx-id", pl.antivaxx_id, "Antivaxx community id (overrides the config)");
  c_pipe->add_option("--work-dir", pl.work_dir, "Work directory (overrides the config)");
  c_pipe->add_flag("--force", pl.force, "Rerun every stage regardless of the manifest");
  c_pipe->add_flag("--quiet", pl.quiet, "No per-stage progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (show_version) {
    std::cout << "vaxnet " << VAXNET_VERSION << "\ndefaults.json sha256 " << pipeline::defaults_hash() << '\n';
    return 0;
  }

  if (c_pipe->parsed()) {
    pipeline::PipelineConfig cfg;
    try {
      cfg = pipeline::load_pipeline_config(pl.config);
      if (pl.seed) cfg.seed = *pl.seed;
      if (pl.antivaxx_id) {
        if (*pl.antivaxx_id < 0) throw ConfigError("--antivaxx-id must be >= 0");
        cfg.antivaxx_id = *pl.antivaxx_id;
      }
      if (!pl.work_dir.empty()) cfg.work_dir = fs::absolute(pl.work_dir).lexically_normal();
      pipeline::RunOptions opts;
      opts.force = pl.force;
      opts.log = pl.quiet ? nullptr : &std::cerr;
      pipeline::run_pipeline(cfg, opts);
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitStage;
    }
  }

  if (!action) {
    std::cout << app.help();
    return kExitConfig;
  }
  try {
    action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
