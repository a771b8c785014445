// Randomized invariant checks, kCases draws per property.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "vaxnet/community.hpp"
#include "vaxnet/corpus.hpp"
#include "vaxnet/eval.hpp"
#include "vaxnet/features.hpp"
#include "vaxnet/graph.hpp"
#include "vaxnet/ingest.hpp"
#include "vaxnet/models.hpp"
#include "vaxnet/pipeline.hpp"
#include "vaxnet/rng.hpp"
#include "vaxnet/termscatter.hpp"

using namespace vaxnet;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCases = 1000;

const std::vector<std::string> kWords{"vaccine", "vaccines", "flu", "shot", "truth", "autism", "the",
                                      "kids",    "health",   "jab", "pharma", "safe", "risk", "mmr"};

std::string random_text(Rng& rng) {
  std::string t;
  const std::size_t n = 1 + rng.index(10);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) t += ' ';
    const auto r = rng.index(10);
    if (r == 0) t += "#" + kWords[rng.index(kWords.size())];
    else if (r == 1) t += "\xF0\x9F\x98\xB7";
    else if (r == 2) t += "@user" + std::to_string(rng.index(5));
    else t += kWords[rng.index(kWords.size())];
    if (rng.bernoulli(0.1)) t += "!";
  }
  return t;
}

/// Random dataset satisfying the post invariants: originals by a handful of
/// authors, retweets pointing at earlier originals.
ingest::Dataset random_dataset(Rng& rng) {
  ingest::Dataset d;
  const std::size_t authors = 2 + rng.index(8);
  const std::size_t posts = 1 + rng.index(30);
  std::vector<std::size_t> originals;
  for (std::size_t i = 0; i < posts; ++i) {
    const auto author = "u" + std::to_string(rng.index(authors));
    const auto id = "p" + std::to_string(i);
    const auto ts = static_cast<std::int64_t>(rng.index(1000));
    if (!originals.empty() && rng.bernoulli(0.5)) {
      d.posts.push_back(vaxnet::test::retweet(id, author, ts, d.posts[originals[rng.index(originals.size())]]));
    } else {
      originals.push_back(d.posts.size());
      d.posts.push_back(vaxnet::test::original(id, author, ts, random_text(rng)));
      d.posts.back().is_verified = rng.bernoulli(0.2);
    }
  }
  return d;
}

graph::RetweetNetwork random_graph(Rng& rng, std::size_t max_nodes = 12) {
  return oracle::random_graph(2 + rng.index(max_nodes - 1), 0.1 + 0.5 * rng.uniform(), rng.index(1u << 30));
}

community::Partition random_partition(Rng& rng, const graph::RetweetNetwork& g) {
  std::map<std::string, int> labels;
  const int k = 1 + static_cast<int>(rng.index(4));
  for (const auto& [n, _] : g.nodes()) labels[n] = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
  return community::Partition::from_labels(labels);
}

std::vector<corpus::UserDocument> random_docs(Rng& rng, std::size_t n) {
  std::vector<corpus::UserDocument> docs;
  for (std::size_t i = 0; i < n; ++i) {
    corpus::UserDocument d;
    d.author_id = "a" + std::to_string(i);
    const std::size_t posts = 1 + rng.index(3);
    for (std::size_t p = 0; p < posts; ++p) {
      d.post_starts.push_back(d.tokens.size());
      const std::size_t len = rng.index(6);
      for (std::size_t t = 0; t < len; ++t) d.tokens.push_back(*corpus::classify(kWords[rng.index(kWords.size())]));
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

/// Random code points biased toward ASCII, emoji and a few stray bytes.
std::string random_utf8(Rng& rng) {
  std::string s;
  const std::size_t n = rng.index(40);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng.index(10);
    char32_t cp;
    if (r < 5) cp = static_cast<char32_t>(0x20 + rng.index(0x5F));
    else if (r < 7) cp = static_cast<char32_t>(0x1F300 + rng.index(0x700));
    else if (r == 7) cp = static_cast<char32_t>(0xA0 + rng.index(0x2000));
    else if (r == 8) {
      s += static_cast<char>(0x80 + rng.index(0x80));
      continue;
    } else cp = static_cast<char32_t>(rng.index(0x110000));
    if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0x41;
    if (cp < 0x80) s += static_cast<char>(cp);
    else if (cp < 0x800) {
      s += static_cast<char>(0xC0 | (cp >> 6));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      s += static_cast<char>(0xE0 | (cp >> 12));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      s += static_cast<char>(0xF0 | (cp >> 18));
      s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return s;
}

features::LabeledSet<features::BowVector> random_bow_set(Rng& rng, std::size_t vocab) {
  features::LabeledSet<features::BowVector> s;
  const std::size_t n = 4 + rng.index(20);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::int32_t, std::uint32_t> counts;
    const std::size_t k = rng.index(5);
    for (std::size_t t = 0; t < k; ++t) ++counts[static_cast<std::int32_t>(rng.index(vocab))];
    features::BowVector x;
    for (const auto& [idx, c] : counts) x.push_back({idx, c});
    s.push_back(x, static_cast<int>(i % 2), "a" + std::to_string(i));
  }
  return s;
}

std::vector<double> random_scores(Rng& rng, std::size_t n) {
  std::vector<double> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(rng.bernoulli(0.3) ? static_cast<double>(rng.index(4)) / 4.0 : rng.uniform());
  return s;
}

std::vector<int> random_labels(Rng& rng, std::size_t n) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.index(2));
  y[0] = 1;
  y[1] = 0;
  return y;
}

// Loop body helper: stop at the first failing case so output stays short.
#define FOR_CASES(seed_base)                                                      \
  for (std::uint64_t c = 0; c < kCases && !::testing::Test::HasFailure(); ++c) \
    if (Rng rng(derive_seed(seed_base, c)); true)

}  // namespace

// ---------------------------------------------------------------------------
// ingest

TEST(IngestProperty, SerializeParseRoundTrip) {
  FOR_CASES(1) {
    const auto d = random_dataset(rng);
    std::ostringstream out;
    ingest::write_dataset(out, d);
    std::istringstream in(out.str());
    EXPECT_EQ(ingest::parse_dataset(in, true).dataset, d) << "case " << c;
  }
}

TEST(IngestProperty, KeywordFilterIdempotent) {
  const ingest::KeywordFilter f({"vaccine", "flu shot", "#mmr"});
  FOR_CASES(2) {
    const auto once = ingest::filter_by_keywords(random_dataset(rng), f);
    EXPECT_EQ(ingest::filter_by_keywords(once, f), once) << "case " << c;
  }
}

TEST(IngestProperty, UserFilterKeepsAuthorsWithOriginals) {
  FOR_CASES(3) {
    const auto d = random_dataset(rng);
    std::set<std::string> with_original;
    for (const auto& p : d.posts) {
      if (!p.is_retweet) with_original.insert(p.author_id);
    }
    const auto kept = ingest::filter_retweet_only_users(d);
    std::size_t expect = 0;
    for (const auto& p : d.posts) expect += with_original.contains(p.author_id);
    EXPECT_EQ(kept.posts.size(), expect) << "case " << c;
    for (const auto& p : kept.posts) EXPECT_TRUE(with_original.contains(p.author_id));
  }
}

TEST(IngestProperty, TopAuthorsBoundedAndReproducible) {
  FOR_CASES(4) {
    const auto d = random_dataset(rng);
    const auto n = 1 + rng.index(6);
    const auto top = ingest::top_authors(d, n, ingest::RankBy::originals);
    std::size_t total = 0;
    for (const auto& [_, k] : top) total += k;
    EXPECT_LE(total, d.posts.size());
    EXPECT_LE(top.size(), n);
    EXPECT_EQ(top, ingest::top_authors(d, n, ingest::RankBy::originals));
    EXPECT_EQ(ingest::top_authors(d, n, ingest::RankBy::times_retweeted),
              ingest::top_authors(d, n, ingest::RankBy::times_retweeted));
  }
}

// ---------------------------------------------------------------------------
// graph

TEST(GraphProperty, TotalWeightCountsDistinctPairRetweets) {
  FOR_CASES(5) {
    const auto d = random_dataset(rng);
    std::uint64_t expect = 0;
    for (const auto& p : d.posts) expect += p.is_retweet && *p.retweeted_author_id != p.author_id;
    const auto g = graph::build_network(d);
    EXPECT_EQ(g.total_weight(), expect) << "case " << c;
    std::uint64_t sum = 0;
    for (const auto& [e, w] : g.edges()) {
      EXPECT_NE(e.first, e.second);
      EXPECT_GE(w, 1u);
      sum += w;
    }
    EXPECT_EQ(sum, expect);
  }
}

TEST(GraphProperty, PrincipalWccIdempotentSubsetConnected) {
  FOR_CASES(6) {
    const auto g = random_graph(rng, 30);
    const auto w = graph::principal_wcc(g);
    EXPECT_EQ(graph::principal_wcc(w), w) << "case " << c;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [n, _] : w.nodes()) {
      EXPECT_TRUE(g.contains(n));
      adj[n];
    }
    for (const auto& [e, _] : w.edges()) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
    if (adj.empty()) continue;
    std::set<std::string> seen{adj.begin()->first};
    std::queue<std::string> q;
    q.push(adj.begin()->first);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (const auto& v : adj[u]) {
        if (seen.insert(v).second) q.push(v);
      }
    }
    EXPECT_EQ(seen.size(), w.node_count()) << "case " << c;
  }
}

TEST(GraphProperty, PermutationInvariant) {
  FOR_CASES(7) {
    auto d = random_dataset(rng);
    const auto g = graph::build_network(d);
    rng.shuffle(std::span(d.posts));
    EXPECT_EQ(graph::build_network(d), g) << "case " << c;
  }
}

// ---------------------------------------------------------------------------
// community

TEST(CommunityProperty, ModularityScaleInvariant) {
  FOR_CASES(8) {
    const auto g = random_graph(rng);
    const auto p = random_partition(rng, g);
    const auto k = 2 + rng.index(5);
    graph::RetweetNetwork scaled;
    for (const auto& [n, info] : g.nodes()) scaled.add_node(n, info);
    for (const auto& [e, w] : g.edges()) scaled.add_weight(e.first, e.second, w * k);
    EXPECT_NEAR(community::modularity(scaled, p), community::modularity(g, p), 1e-12) << "case " << c;
  }
}

TEST(CommunityProperty, ModularityMatchesDoubleSum) {
  FOR_CASES(9) {
    const auto g = random_graph(rng);
    const auto p = random_partition(rng, g);
    const double r = 0.5 + rng.uniform();
    EXPECT_NEAR(community::modularity(g, p, r), oracle::modularity_double_sum(g, p, r), 1e-12) << "case " << c;
    EXPECT_NEAR(community::serial::modularity(g, p, r), oracle::modularity_double_sum(g, p, r), 1e-12);
  }
}

TEST(CommunityProperty, LouvainMonotoneAndBeatsTrivialPartitions) {
  FOR_CASES(10) {
    const auto g = random_graph(rng, 25);
    if (g.total_weight() == 0) continue;
    community::LouvainTrace trace;
    const auto p = community::louvain(g, c, 1.0, &trace);
    for (std::size_t i = 1; i < trace.pass_modularity.size(); ++i) {
      EXPECT_GE(trace.pass_modularity[i], trace.pass_modularity[i - 1] - 1e-12) << "case " << c;
    }
    std::map<std::string, int> singletons;
    int id = 0;
    for (const auto& [n, _] : g.nodes()) singletons[n] = id++;
    const double q = community::modularity(g, p);
    EXPECT_GE(q, community::modularity(g, community::Partition::from_labels(singletons)) - 1e-12);
    EXPECT_GE(q, -1e-12);
    // Coverage and dense ids.
    EXPECT_EQ(p.assignment.size(), g.node_count());
    std::set<int> ids;
    for (const auto& [n, cid] : p.assignment) ids.insert(cid);
    EXPECT_EQ(static_cast<int>(ids.size()), p.community_count);
    EXPECT_EQ(*ids.rbegin(), p.community_count - 1);
  }
}

TEST(CommunityProperty, LabelsPartitionNodes) {
  FOR_CASES(11) {
    const auto g = random_graph(rng);
    const auto p = random_partition(rng, g);
    const auto l = community::label_binary(p, static_cast<int>(rng.index(static_cast<std::size_t>(p.community_count))));
    EXPECT_EQ(l.size(), g.node_count());
    for (const auto& [n, _] : g.nodes()) EXPECT_TRUE(l.contains(n));
  }
}

TEST(CommunityProperty, RelabelingLeavesModularityUnchanged) {
  FOR_CASES(12) {
    const auto g = random_graph(rng);
    const auto p = random_partition(rng, g);
    std::vector<int> perm(static_cast<std::size_t>(p.community_count));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    community::Partition q = p;
    for (auto& [n, cid] : q.assignment) cid = perm[static_cast<std::size_t>(cid)];
    EXPECT_EQ(community::modularity(g, q), community::modularity(g, p)) << "case " << c;
  }
}

TEST(CommunityProperty, SummarySharesSumToOne) {
  FOR_CASES(13) {
    const auto d = random_dataset(rng);
    const auto g = graph::principal_wcc(graph::build_network(d));
    if (g.total_weight() == 0) continue;
    const auto p = random_partition(rng, g);
    double nodes = 0.0, weight = 0.0;
    for (const auto& s : community::summarize_communities(g, p, d, 5)) {
      nodes += s.node_share;
      weight += s.retweet_share;
    }
    EXPECT_NEAR(nodes, 1.0, 1e-9) << "case " << c;
    EXPECT_NEAR(weight, 1.0, 1e-9) << "case " << c;
  }
}

// ---------------------------------------------------------------------------
// corpus

TEST(CorpusProperty, TokenizerFuzzEmitsWellFormedTokens) {
  FOR_CASES(14) {
    const auto text = random_utf8(rng);
    const auto tokens = corpus::tokenize(text);
    for (const auto& t : tokens) EXPECT_TRUE(corpus::well_formed(t.kind, t.surface)) << t.surface;
    EXPECT_EQ(corpus::tokenize(text), tokens);
  }
}

TEST(CorpusProperty, PostCountsMatchOriginals) {
  FOR_CASES(15) {
    const auto d = random_dataset(rng);
    const auto docs = corpus::build_documents(d);
    std::size_t posts = 0, originals = 0;
    for (const auto& doc : docs) {
      EXPECT_GE(doc.n_posts(), 1u);
      posts += doc.n_posts();
    }
    for (const auto& p : d.posts) originals += !p.is_retweet;
    EXPECT_EQ(posts, originals) << "case " << c;
  }
}

// ---------------------------------------------------------------------------
// termscatter

TEST(ScatterProperty, MonotoneSwapSymmetricScoreBounded) {
  FOR_CASES(16) {
    const auto docs = random_docs(rng, 2 + rng.index(12));
    std::vector<int> pos(docs.size());
    for (auto& v : pos) v = static_cast<int>(rng.index(2));
    std::vector<int> flipped(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) flipped[i] = 1 - pos[i];
    termscatter::CountOptions o;
    o.min_count = 1 + rng.index(2);
    const auto counts = termscatter::count_terms(docs, pos, o);
    if (counts.empty()) continue;
    const auto s = termscatter::compute_coordinates(counts);
    const auto swapped = termscatter::compute_coordinates(termscatter::count_terms(docs, flipped, o));
    ASSERT_EQ(s.size(), swapped.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_GE(s[i].count_pos + s[i].count_neg, o.min_count);
      EXPECT_EQ(swapped[i].term, s[i].term);
      EXPECT_EQ(swapped[i].x, s[i].y) << "case " << c;
      EXPECT_EQ(swapped[i].y, s[i].x) << "case " << c;
      EXPECT_GE(s[i].score, 0.0);
      EXPECT_LE(s[i].score, 1.0);
      if (s[i].score == 1.0) {
        EXPECT_EQ(s[i].x, 1.0);
        EXPECT_EQ(s[i].y, 0.0);
      }
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[i].count_pos > s[j].count_pos) EXPECT_GT(s[i].x, s[j].x);
        if (s[i].count_pos == s[j].count_pos) EXPECT_EQ(s[i].x, s[j].x);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// features

TEST(FeatureProperty, VocabularyBowAndSequenceInvariants) {
  FOR_CASES(17) {
    const auto docs = random_docs(rng, 1 + rng.index(10));
    bool any = false;
    for (const auto& d : docs) any |= !d.tokens.empty();
    if (!any) continue;
    const auto vocab = features::build_vocabulary(docs, 1, 3 + rng.index(10));
    for (std::size_t i = 0; i < vocab.tokens().size(); ++i) {
      EXPECT_EQ(vocab.index_of(vocab.tokens()[i]), static_cast<std::int32_t>(i + 2));
    }
    const std::size_t len = 1 + rng.index(12);
    for (const auto& d : docs) {
      std::uint64_t total = 0;
      for (const auto& e : features::vectorize_bow(d, vocab)) {
        EXPECT_GE(e.count, 1u);
        total += e.count;
      }
      EXPECT_EQ(total, d.tokens.size()) << "case " << c;
      const auto seq = features::encode_sequence(d, vocab, len);
      ASSERT_EQ(seq.ids.size(), len);
      for (std::size_t i = 0; i + 1 < len; ++i) {
        if (seq.ids[i] == 0) EXPECT_EQ(seq.ids[i + 1], 0) << "case " << c;
      }
    }
  }
}

TEST(FeatureProperty, BalancedSampleAndSplit) {
  FOR_CASES(18) {
    const std::size_t n = 4 + rng.index(40);
    const auto docs = random_docs(rng, n);
    community::BinaryLabels labels;
    const std::size_t n_pos = 1 + rng.index(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
      labels[docs[i].author_id] = i < n_pos ? community::Label::antivaxx : community::Label::other;
    }
    const auto s = features::balanced_sample(docs, labels, c);
    const auto pos = std::count(s.labels.begin(), s.labels.end(), 1);
    EXPECT_EQ(static_cast<std::size_t>(pos), n_pos);
    EXPECT_EQ(s.size(), 2 * n_pos);
    EXPECT_EQ(s.samples.size(), s.authors.size());
    if (n_pos < 2) continue;
    const auto split = features::train_test_split(s, 0.1 + 0.8 * rng.uniform(), c);
    std::set<std::string> train(split.first.authors.begin(), split.first.authors.end());
    for (const auto& a : split.second.authors) EXPECT_FALSE(train.contains(a)) << "case " << c;
    EXPECT_EQ(split.first.size() + split.second.size(), s.size());
  }
}

// ---------------------------------------------------------------------------
// models

TEST(ModelProperty, TrainersDeterministicWithFiniteLoss) {
  FOR_CASES(19) {
    const std::size_t vocab = 4 + rng.index(8);
    const auto set = random_bow_set(rng, vocab);
    models::TrainConfig cfg;
    cfg.epochs = 1 + rng.index(3);
    cfg.seed = c;
    cfg.hidden_dims = {2 + rng.index(4)};
    cfg.n_trees = 3;
    cfg.learning_rate = 0.05;
    models::TrainLog la, lb;
    switch (c % 3) {
      case 0: {
        const auto a = models::train_logreg(set, vocab, cfg, &la);
        const auto b = models::train_logreg(set, vocab, cfg, &lb);
        EXPECT_EQ(a.weights, b.weights);
        EXPECT_EQ(a.bias, b.bias);
        break;
      }
      case 1: {
        const auto a = models::train_feedforward(set, vocab, cfg, &la);
        const auto b = models::train_feedforward(set, vocab, cfg, &lb);
        for (std::size_t i = 0; i < a.params.size(); ++i) EXPECT_EQ(a.params[i], b.params[i]);
        EXPECT_TRUE(a.all_finite());
        break;
      }
      default: {
        const auto seq = set.map([&](const features::BowVector& x) {
          features::SequenceSample s;
          for (const auto& e : x) s.ids.insert(s.ids.end(), e.count, std::max<std::int32_t>(2, e.index));
          s.ids.resize(6, 0);
          if (s.ids[0] == 0) s.ids[0] = 2;
          return s;
        });
        const auto kind = c % 2 ? models::RecurrentKind::gru : models::RecurrentKind::lstm;
        const auto a = models::train_recurrent(seq, vocab, kind, cfg, &la);
        const auto b = models::train_recurrent(seq, vocab, kind, cfg, &lb);
        for (std::size_t i = 0; i < a.params.size(); ++i) EXPECT_EQ(a.params[i], b.params[i]);
      }
    }
    EXPECT_EQ(la.epoch_loss, lb.epoch_loss);
    EXPECT_EQ(la.epoch_loss.size(), cfg.epochs);
    for (const double l : la.epoch_loss) EXPECT_TRUE(std::isfinite(l)) << "case " << c;
  }
}

TEST(ModelProperty, NaiveBayesDistributions) {
  FOR_CASES(20) {
    const std::size_t vocab = 2 + rng.index(10);
    const auto set = random_bow_set(rng, vocab);
    const auto m = models::train_multinomial_nb(set, vocab, 0.1 + rng.uniform() * 2);
    for (const auto& ll : m.log_likelihood) {
      double total = 0.0;
      for (const double v : ll) total += std::exp(v);
      EXPECT_NEAR(total, 1.0, 1e-9) << "case " << c;
    }
    // Posterior over the two classes from the joint log-probabilities.
    for (const auto& x : set.samples) {
      std::array<double, 2> joint = m.log_prior;
      for (int k = 0; k < 2; ++k) {
        for (const auto& e : x) joint[k] += e.count * m.log_likelihood[k][static_cast<std::size_t>(e.index)];
      }
      const double mx = std::max(joint[0], joint[1]);
      const double p1 = std::exp(joint[1] - mx) / (std::exp(joint[0] - mx) + std::exp(joint[1] - mx));
      EXPECT_NEAR(m.score(x), p1, 1e-12);
      EXPECT_NEAR(m.score(x) + (1.0 - p1), 1.0, 1e-9);
    }
  }
}

TEST(ModelProperty, LogregLabelSwapNegatesMargin) {
  FOR_CASES(21) {
    const std::size_t vocab = 3 + rng.index(8);
    const auto set = random_bow_set(rng, vocab);
    auto swapped = set;
    for (auto& y : swapped.labels) y = 1 - y;
    models::TrainConfig cfg;
    cfg.epochs = 1 + rng.index(5);
    cfg.seed = c;
    const auto a = models::train_logreg(set, vocab, cfg);
    const auto b = models::train_logreg(swapped, vocab, cfg);
    for (const auto& x : set.samples) EXPECT_NEAR(b.score(x), 1.0 - a.score(x), 1e-6) << "case " << c;
  }
}

TEST(ModelProperty, GradientChecks) {
  const std::pair<models::ModelKind, double> limits[] = {
      {models::ModelKind::logreg, 1e-6},  {models::ModelKind::hinge, 1e-6}, {models::ModelKind::dnn_bow, 1e-5},
      {models::ModelKind::dnn_seq, 1e-5}, {models::ModelKind::gru, 1e-4},  {models::ModelKind::lstm, 1e-4}};
  FOR_CASES(22) {
    const auto& [kind, limit] = limits[c % 6];
    EXPECT_LT(models::grad_check(kind, c), limit) << models::cli_name(kind) << " case " << c;
  }
}

TEST(ModelProperty, ForestIsMeanOfTreesAndWellFormed) {
  FOR_CASES(23) {
    const std::size_t vocab = 3 + rng.index(8);
    const auto set = random_bow_set(rng, vocab);
    models::TrainConfig cfg;
    cfg.n_trees = 1 + rng.index(6);
    cfg.max_depth = rng.index(5);
    cfg.seed = c;
    const auto f = models::train_random_forest(set, vocab, cfg);
    for (const auto& x : set.samples) {
      double mean = 0.0;
      for (const auto& t : f.trees) mean += t.predict(x);
      EXPECT_NEAR(f.score(x), mean / static_cast<double>(f.trees.size()), 1e-15);
    }
    for (const auto& t : f.trees) {
      for (const auto& n : t.nodes) {
        EXPECT_TRUE(n.value >= 0.0 && n.value <= 1.0);
        if (n.leaf()) continue;
        EXPECT_TRUE(n.left >= 0 && static_cast<std::size_t>(n.left) < t.nodes.size());
        EXPECT_TRUE(n.right >= 0 && static_cast<std::size_t>(n.right) < t.nodes.size());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// eval

TEST(EvalProperty, AucInvariantUnderIncreasingTransforms) {
  FOR_CASES(24) {
    const std::size_t n = 2 + rng.index(60);
    const auto s = random_scores(rng, n);
    const auto y = random_labels(rng, n);
    const double a = 0.1 + 5 * rng.uniform(), b = rng.uniform() - 0.5;
    std::vector<double> ex, affine;
    for (const double v : s) {
      ex.push_back(std::exp(v));
      affine.push_back(a * v + b);
    }
    const double auc = eval::roc_auc(s, y);
    EXPECT_NEAR(eval::roc_auc(ex, y), auc, 1e-12) << "case " << c;
    EXPECT_NEAR(eval::roc_auc(affine, y), auc, 1e-12) << "case " << c;
  }
}

TEST(EvalProperty, FlippedLabelsComplement) {
  FOR_CASES(25) {
    const std::size_t n = 2 + rng.index(60);
    auto s = random_scores(rng, n);
    const auto y = random_labels(rng, n);
    std::vector<int> flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
    EXPECT_NEAR(eval::roc_auc(s, y) + eval::roc_auc(s, flipped), 1.0, 1e-9) << "case " << c;
    for (auto& v : s) {
      if (v == 0.5) v = 0.75;
    }
    EXPECT_NEAR(eval::accuracy(s, y) + eval::accuracy(s, flipped), 1.0, 1e-12) << "case " << c;
  }
}

TEST(EvalProperty, TrapezoidEqualsMannWhitney) {
  FOR_CASES(26) {
    const std::size_t n = 2 + rng.index(60);
    const auto s = random_scores(rng, n);
    const auto y = random_labels(rng, n);
    EXPECT_NEAR(eval::trapezoid_area(eval::roc_curve(s, y)), eval::roc_auc(s, y), 1e-9) << "case " << c;
    const auto r = eval::evaluate(models::ModelKind::nb, s, y, 0);
    EXPECT_EQ(r.confusion.total(), n);
    EXPECT_TRUE(r.accuracy >= 0.0 && r.accuracy <= 1.0);
  }
}

// ---------------------------------------------------------------------------
// pipeline

TEST(PipelineProperty, ManifestConfigEchoReparses) {
  FOR_CASES(27) {
    nlohmann::json j{{"input", "in.jsonl"},
                     {"work_dir", "w"},
                     {"seed", rng.index(1u << 20)},
                     {"community", {{"resolution", 0.5 + rng.uniform()}, {"top_k", 1 + rng.index(20)}}},
                     {"features", {{"min_df", 1 + rng.index(3)}, {"max_len", 1 + rng.index(300)}}},
                     {"scatter", {{"min_count", 1 + rng.index(9)}, {"ngram_max", 1 + rng.index(2)}}}};
    std::vector<std::string> names;
    for (const auto k : models::kAllModels) {
      if (rng.bernoulli(0.5)) names.push_back(std::string(models::cli_name(k)));
    }
    names.push_back("lstm");
    j["models"] = names;
    if (rng.bernoulli(0.5)) j["training"] = {{"lstm", {{"epochs", 1 + rng.index(9)}}}};
    if (rng.bernoulli(0.5)) j["community"]["antivaxx_id"] = rng.index(4);
    const auto cfg = pipeline::parse_pipeline_config(j, "/base");
    const auto echo = cfg.to_json();
    const auto again = pipeline::parse_pipeline_config(nlohmann::json::parse(echo.dump()), "/elsewhere");
    EXPECT_EQ(again.to_json(), echo) << "case " << c;
  }
}

TEST(PipelineProperty, RepeatedRunsAreByteIdentical) {
  vaxnet::test::TempDir dir("prop");
  FOR_CASES(28) {
    ingest::SynthConfig sc;
    sc.n_users = 12 + 2 * rng.index(6);
    sc.posts_per_user = 1 + rng.index(2);
    sc.tokens_per_post = 4;
    sc.retweet_density = 2.0;
    const auto s = ingest::generate_synthetic(sc, c);
    const auto work = dir / ("w" + std::to_string(c));
    fs::create_directories(work);
    {
      std::ofstream out(work / "in.jsonl");
      ingest::write_dataset(out, s.dataset);
    }
    nlohmann::json j{{"input", "in.jsonl"},
                     {"work_dir", "out"},
                     {"seed", c},
                     {"community", {{"antivaxx_id", 0}}},
                     {"scatter", {{"min_count", 1}, {"formats", {"tsv"}}}},
                     {"features", {{"min_df", 1}, {"max_len", 8}}},
                     {"models", {"nb"}},
                     {"score_model", "nb"}};
    const auto cfg = pipeline::parse_pipeline_config(j, work);
    std::map<std::string, std::string> first;
    pipeline::RunOptions force;
    force.force = true;
    try {
      pipeline::run_pipeline(cfg, force);
    } catch (const pipeline::StageError&) {
      // Tiny random graphs can leave too few labeled authors to featurize;
      // the failure itself must then repeat identically.
    }
    for (const auto& e : fs::recursive_directory_iterator(work / "out")) {
      if (e.is_regular_file() && e.path().filename() != "manifest.json") first[e.path().string()] = io::read_file(e.path());
    }
    auto strip = [](nlohmann::json m) {
      m.erase("started_at");
      m.erase("finished_at");
      return m;
    };
    const auto m1 = strip(nlohmann::json::parse(io::read_file(work / "out" / "manifest.json")));
    try {
      pipeline::run_pipeline(cfg, force);
    } catch (const pipeline::StageError&) {
    }
    std::size_t seen = 0;
    for (const auto& e : fs::recursive_directory_iterator(work / "out")) {
      if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
      ++seen;
      EXPECT_EQ(io::read_file(e.path()), first.at(e.path().string())) << e.path() << " case " << c;
    }
    EXPECT_EQ(seen, first.size());
    EXPECT_EQ(strip(nlohmann::json::parse(io::read_file(work / "out" / "manifest.json"))), m1) << "case " << c;
    fs::remove_all(work);
  }
}
