#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vaxnet/features.hpp"
#include "vaxnet/ingest.hpp"

using namespace vaxnet;
using namespace vaxnet::features;
using vaxnet::test::make_doc;

namespace {

std::vector<corpus::UserDocument> fixture_docs() {
  return corpus::build_documents(ingest::filter_retweet_only_users(vaxnet::test::fixture_dataset()));
}

/// `pos` Antivaxx authors p0.. and `neg` Other authors n0.., one token each.
std::pair<std::vector<corpus::UserDocument>, community::BinaryLabels> population(std::size_t pos,
                                                                                  std::size_t neg) {
  std::vector<corpus::UserDocument> docs;
  community::BinaryLabels labels;
  for (std::size_t i = 0; i < pos; ++i) {
    docs.push_back(make_doc("p" + std::to_string(i), {"x"}));
    labels["p" + std::to_string(i)] = community::Label::antivaxx;
  }
  for (std::size_t i = 0; i < neg; ++i) {
    docs.push_back(make_doc("n" + std::to_string(i), {"y"}));
    labels["n" + std::to_string(i)] = community::Label::other;
  }
  return {docs, labels};
}

}  // namespace

TEST(Vocabulary, FrequencyOrder) {
  const std::vector docs{make_doc("a", {"a", "a", "b"})};
  const auto v = build_vocabulary(docs, 1, 100);
  EXPECT_EQ(v.index_of("a"), 2);
  EXPECT_EQ(v.index_of("b"), 3);
  EXPECT_EQ(v.index_of("zzz"), Vocabulary::kUnknown);
  EXPECT_EQ(v.size(), 4u);
}

TEST(Vocabulary, MinDocumentFrequency) {
  const std::vector docs{make_doc("a", {"a", "b", "b"}), make_doc("c", {"a"})};
  const auto v = build_vocabulary(docs, 2, 100);
  EXPECT_EQ(v.tokens(), std::vector<std::string>{"a"});
}

TEST(Vocabulary, TiesLexicographicAndTruncation) {
  const std::vector docs{make_doc("a", {"c", "b", "a", "d", "d"})};
  EXPECT_EQ(build_vocabulary(docs, 1, 3).tokens(), (std::vector<std::string>{"d", "a", "b"}));
}

TEST(Vocabulary, Errors) {
  EXPECT_THROW(build_vocabulary({}, 1, 10), Error);
  const std::vector docs{make_doc("a", {"x"})};
  EXPECT_THROW(build_vocabulary(docs, 0, 10), Error);
}

TEST(Vocabulary, FixtureGolden) {
  const auto v = build_vocabulary(fixture_docs(), 1, 50);
  EXPECT_EQ(v.tokens(), vaxnet::test::fixture_golden()["vocabulary_min_df1_max50"].get<std::vector<std::string>>());
}

TEST(Vocabulary, TsvRoundTripAndHash) {
  const auto v = build_vocabulary(fixture_docs(), 1, 50);
  std::ostringstream out;
  v.write_tsv(out);
  std::istringstream in(out.str());
  const auto back = Vocabulary::read_tsv(in);
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.hash(), v.hash());
  EXPECT_EQ(v.hash(), io::sha256_hex(out.str()));
  EXPECT_NE(build_vocabulary(fixture_docs(), 1, 49).hash(), v.hash());
}

TEST(Bow, Counts) {
  const Vocabulary v({"a", "b"});
  EXPECT_EQ(vectorize_bow(make_doc("d", {"a", "a", "b"}), v), (BowVector{{2, 2}, {3, 1}}));
  EXPECT_EQ(vectorize_bow(make_doc("d", {"q", "r", "s"}), v), (BowVector{{1, 3}}));
  EXPECT_TRUE(vectorize_bow(corpus::UserDocument{}, v).empty());
}

TEST(Bow, FixtureMatchesTallyOracle) {
  const auto docs = fixture_docs();
  const auto v = build_vocabulary(docs, 1, 50);
  const auto& golden = vaxnet::test::fixture_golden()["bow_min_df1_max50"];
  for (const auto& d : docs) {
    BowVector expect;
    for (const auto& e : golden.at(d.author_id)) expect.push_back({e[0].get<std::int32_t>(), e[1].get<std::uint32_t>()});
    EXPECT_EQ(vectorize_bow(d, v), expect) << d.author_id;
  }
}

TEST(Bow, ParallelMatchesSerial) {
  ingest::SynthConfig cfg;
  cfg.n_users = 400;
  const auto docs = corpus::build_documents(ingest::generate_synthetic(cfg, 2).dataset);
  const auto v = build_vocabulary(docs, 2, 200);
  EXPECT_EQ(vectorize_all(docs, v), serial::vectorize_all(docs, v));
}

TEST(Sequence, PadsAndTruncates) {
  const Vocabulary v({"a", "b"});
  EXPECT_EQ(encode_sequence(make_doc("d", {"a", "b"}), v, 4).ids, (std::vector<std::int32_t>{2, 3, 0, 0}));
  EXPECT_EQ(encode_sequence(make_doc("d", {"b", "z", "a", "a"}), v, 3).ids, (std::vector<std::int32_t>{3, 1, 2}));
  EXPECT_EQ(encode_sequence(corpus::UserDocument{}, v, 3).ids, (std::vector<std::int32_t>{0, 0, 0}));
  EXPECT_EQ(encode_sequence(make_doc("d", {"a", "b"}), v, 4).length(), 2u);
  EXPECT_THROW(encode_sequence(make_doc("d", {"a"}), v, 0), Error);
}

TEST(Sequence, BatchMatchesSingle) {
  const auto docs = fixture_docs();
  const auto v = build_vocabulary(docs, 1, 20);
  const auto all = encode_all(docs, v, 16);
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(all[i], encode_sequence(docs[i], v, 16));
}

TEST(Balanced, EqualClasses) {
  const auto [docs, labels] = population(10, 100);
  const auto s = balanced_sample(docs, labels, 3);
  EXPECT_EQ(s.size(), 20u);
  int pos = 0;
  for (const int l : s.labels) pos += l;
  EXPECT_EQ(pos, 10);
  std::set<std::string> unique(s.authors.begin(), s.authors.end());
  EXPECT_EQ(unique.size(), 20u);
}

TEST(Balanced, InsufficientNegativesIsError) {
  const auto [docs, labels] = population(10, 5);
  EXPECT_THROW(balanced_sample(docs, labels, 1), Error);
}

TEST(Balanced, DeterministicForSeed) {
  const auto [docs, labels] = population(10, 100);
  EXPECT_EQ(balanced_sample(docs, labels, 7).authors, balanced_sample(docs, labels, 7).authors);
  EXPECT_NE(balanced_sample(docs, labels, 7).authors, balanced_sample(docs, labels, 8).authors);
}

TEST(Split, TenAndTen) {
  std::vector<int> labels(20);
  for (int i = 0; i < 10; ++i) labels[i] = 1;
  const auto s = stratified_split(labels, 0.8, 1);
  ASSERT_EQ(s.train.size(), 16u);
  ASSERT_EQ(s.test.size(), 4u);
  int train_pos = 0, test_pos = 0;
  for (const auto i : s.train) train_pos += labels[i];
  for (const auto i : s.test) test_pos += labels[i];
  EXPECT_EQ(train_pos, 8);
  EXPECT_EQ(test_pos, 2);
}

TEST(Split, FloorRuleTwentyFive) {
  std::vector<int> labels(50);
  for (int i = 0; i < 25; ++i) labels[i] = 1;
  const auto s = stratified_split(labels, 0.8, 4);
  int train_pos = 0;
  for (const auto i : s.train) train_pos += labels[i];
  EXPECT_EQ(train_pos, 20);
  EXPECT_EQ(s.train.size(), 40u);
}

TEST(Split, DisjointAndComplete) {
  std::vector<int> labels(37);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3 == 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = stratified_split(labels, 0.7, seed);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (const auto i : s.test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), labels.size());
  }
}

TEST(Split, Errors) {
  const std::vector<int> labels{1, 0, 0, 0};
  EXPECT_THROW(stratified_split(labels, 0.8, 1), Error);
  const std::vector<int> ok{1, 1, 0, 0};
  EXPECT_THROW(stratified_split(ok, 0.0, 1), Error);
  EXPECT_THROW(stratified_split(ok, 1.0, 1), Error);
}

TEST(Representation, Names) {
  EXPECT_EQ(parse_representation("bow"), Representation::bow);
  EXPECT_EQ(parse_representation("seq"), Representation::sequence);
  EXPECT_EQ(name(Representation::sequence), "seq");
  EXPECT_THROW(parse_representation("tfidf"), Error);
}
