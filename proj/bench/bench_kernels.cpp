// Parallel kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include "vaxnet/community.hpp"
#include "vaxnet/corpus.hpp"
#include "vaxnet/eval.hpp"
#include "vaxnet/features.hpp"
#include "vaxnet/graph.hpp"
#include "vaxnet/ingest.hpp"
#include "vaxnet/models.hpp"
#include "vaxnet/rng.hpp"
#include "vaxnet/termscatter.hpp"

using namespace vaxnet;

namespace {

struct Corpus {
  ingest::SyntheticData data;
  std::vector<corpus::UserDocument> docs;
  std::vector<int> positive;
  features::Vocabulary vocab;
  graph::RetweetNetwork network;
  community::Partition partition;
};

const Corpus& corpus_of(std::size_t users) {
  static std::map<std::size_t, Corpus> cache;
  auto [it, fresh] = cache.try_emplace(users);
  if (fresh) {
    ingest::SynthConfig cfg;
    cfg.n_users = users;
    cfg.n_communities = 4;
    auto& c = it->second;
    c.data = ingest::generate_synthetic(cfg, 1);
    c.docs = corpus::build_documents(c.data.dataset);
    for (const auto& d : c.docs) c.positive.push_back(c.data.planted.at(d.author_id) == 0);
    c.vocab = features::build_vocabulary(c.docs, 2, 20000);
    c.network = graph::principal_wcc(graph::build_network(c.data.dataset));
    std::map<std::string, int> planted;
    for (const auto& [n, _] : c.network.nodes()) planted[n] = c.data.planted.at(n);
    c.partition = community::Partition::from_labels(planted);
  }
  return it->second;
}

void BM_BuildDocuments(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corpus::build_documents(c.data.dataset));
}
void BM_BuildDocumentsSerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corpus::serial::build_documents(c.data.dataset));
}

void BM_CountTerms(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(termscatter::count_terms(c.docs, c.positive, {}));
}
void BM_CountTermsSerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(termscatter::serial::count_terms(c.docs, c.positive, {}));
}

void BM_VectorizeBow(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(features::vectorize_all(c.docs, c.vocab));
}
void BM_VectorizeBowSerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(features::serial::vectorize_all(c.docs, c.vocab));
}

void BM_Modularity(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(community::modularity(c.network, c.partition));
}
void BM_ModularitySerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(community::serial::modularity(c.network, c.partition));
}

features::LabeledSet<features::BowVector> forest_input(const Corpus& c) {
  features::LabeledSet<features::BowVector> s;
  const auto bow = features::vectorize_all(c.docs, c.vocab);
  for (std::size_t i = 0; i < bow.size(); ++i) s.push_back(bow[i], c.positive[i], c.docs[i].author_id);
  return s;
}

models::TrainConfig forest_config() {
  models::TrainConfig cfg;
  cfg.n_trees = 16;
  cfg.max_depth = 12;
  return cfg;
}

void BM_Forest(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  const auto input = forest_input(c);
  for (auto _ : state) benchmark::DoNotOptimize(models::train_random_forest(input, c.vocab.size(), forest_config()));
}
void BM_ForestSerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  const auto input = forest_input(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(models::serial::train_random_forest(input, c.vocab.size(), forest_config()));
  }
}

std::pair<std::vector<double>, std::vector<int>> auc_input(std::size_t n) {
  Rng rng(3);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    y[i] = static_cast<int>(i % 2);
  }
  return {s, y};
}

void BM_AucRanks(benchmark::State& state) {
  const auto [s, y] = auc_input(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval::roc_auc(s, y));
}
void BM_AucPairwise(benchmark::State& state) {
  const auto [s, y] = auc_input(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval::serial::roc_auc_pairwise(s, y));
}

}  // namespace

BENCHMARK(BM_BuildDocuments)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildDocumentsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountTerms)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountTermsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VectorizeBow)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VectorizeBowSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Modularity)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ModularitySerial)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Forest)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AucRanks)->Arg(4000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AucPairwise)->Arg(4000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
