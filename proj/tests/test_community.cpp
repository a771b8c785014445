#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "vaxnet/community.hpp"
#include "vaxnet/ingest.hpp"

using namespace vaxnet;
using namespace vaxnet::community;
using vaxnet::test::fixture_golden;
using vaxnet::test::make_graph;

namespace {

graph::RetweetNetwork fixture_wcc() {
  const auto d = ingest::filter_retweet_only_users(vaxnet::test::fixture_dataset());
  return graph::principal_wcc(graph::build_network(d));
}

Partition fixture_partition() {
  return Partition::from_labels(fixture_golden()["fixture_partition"].get<std::map<std::string, int>>());
}

graph::RetweetNetwork two_triangles() {
  return make_graph({{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}, {"x", "y", 1}, {"y", "z", 1}, {"z", "x", 1}});
}

}  // namespace

TEST(Modularity, OneBlockIsZero) {
  const auto g = two_triangles();
  std::map<std::string, int> all;
  for (const auto& [n, _] : g.nodes()) all[n] = 0;
  EXPECT_NEAR(modularity(g, Partition::from_labels(all)), 0.0, 1e-15);
}

TEST(Modularity, DisjointEqualCliquesIsHalf) {
  const auto p = Partition::from_labels({{"a", 0}, {"b", 0}, {"c", 0}, {"x", 1}, {"y", 1}, {"z", 1}});
  EXPECT_NEAR(modularity(two_triangles(), p), 0.5, 1e-15);
}

TEST(Modularity, FixtureMatchesDoubleSum) {
  const auto g = fixture_wcc();
  const auto p = fixture_partition();
  EXPECT_NEAR(modularity(g, p), oracle::modularity_double_sum(g, p), 1e-12);
  EXPECT_NEAR(serial::modularity(g, p), oracle::modularity_double_sum(g, p), 1e-12);
}

TEST(Modularity, ResolutionMatchesDoubleSum) {
  const auto g = oracle::random_graph(9, 0.3, 3);
  const auto p = Partition::from_labels(
      {{"n0", 0}, {"n1", 1}, {"n2", 0}, {"n3", 2}, {"n4", 1}, {"n5", 2}, {"n6", 0}, {"n7", 1}, {"n8", 2}});
  for (const double r : {0.5, 1.0, 2.0}) {
    EXPECT_NEAR(modularity(g, p, r), oracle::modularity_double_sum(g, p, r), 1e-12);
  }
}

TEST(Modularity, MissingNodeIsError) {
  EXPECT_THROW(modularity(two_triangles(), Partition::from_labels({{"a", 0}})), Error);
}

TEST(Modularity, EdgelessIsZero) {
  const auto g = make_graph({}, {"a", "b"});
  EXPECT_EQ(modularity(g, Partition::from_labels({{"a", 0}, {"b", 1}})), 0.0);
}

TEST(Louvain, TwoTrianglesSplit) {
  const auto p = louvain(two_triangles(), 1);
  EXPECT_EQ(p.community_count, 2);
  EXPECT_EQ(p.assignment.at("a"), p.assignment.at("b"));
  EXPECT_EQ(p.assignment.at("a"), p.assignment.at("c"));
  EXPECT_EQ(p.assignment.at("x"), p.assignment.at("z"));
  EXPECT_NE(p.assignment.at("a"), p.assignment.at("x"));
}

TEST(Louvain, DeterministicForSeed) {
  const auto g = oracle::planted_blocks(120, 4, 0.2, 0.02, 8);
  EXPECT_EQ(louvain(g, 5), louvain(g, 5));
}

TEST(Louvain, TraceIsMonotone) {
  const auto g = oracle::planted_blocks(200, 5, 0.15, 0.02, 2);
  LouvainTrace trace;
  const auto p = louvain(g, 3, 1.0, &trace);
  ASSERT_FALSE(trace.pass_modularity.empty());
  for (std::size_t i = 1; i < trace.pass_modularity.size(); ++i) {
    EXPECT_GE(trace.pass_modularity[i], trace.pass_modularity[i - 1] - 1e-12);
  }
  EXPECT_NEAR(trace.pass_modularity.back(), modularity(g, p), 1e-9);
}

TEST(Louvain, FixtureNearOptimum) {
  const auto g = fixture_wcc();
  const auto [best, q] = brute_force_best_partition(g);
  EXPECT_GE(modularity(g, louvain(g, 1)), q - 0.02);
  EXPECT_NEAR(modularity(g, best), q, 1e-12);
}

TEST(Louvain, RecoversPlantedCommunities) {
  ingest::SynthConfig cfg;
  cfg.n_users = 600;
  cfg.retweet_density = 10.0;
  const auto s = ingest::generate_synthetic(cfg, 1);
  const auto g = graph::principal_wcc(graph::build_network(s.dataset));
  EXPECT_GE(oracle::majority_match(louvain(g, 1), s.planted), 0.95);
}

TEST(Louvain, RejectsEmptyGraph) { EXPECT_THROW(louvain(graph::RetweetNetwork{}, 1), Error); }

TEST(BruteForce, SingleEdge) {
  const auto [p, q] = brute_force_best_partition(make_graph({{"u", "v", 1}}));
  EXPECT_EQ(p.community_count, 1);
  EXPECT_NEAR(q, 0.0, 1e-15);
}

TEST(BruteForce, TwoDisconnectedEdges) {
  const auto [p, q] = brute_force_best_partition(make_graph({{"a", "b", 1}, {"c", "d", 1}}));
  EXPECT_EQ(p.community_count, 2);
  EXPECT_NEAR(q, 0.5, 1e-15);
}

TEST(BruteForce, RejectsElevenNodes) {
  EXPECT_THROW(brute_force_best_partition(oracle::random_graph(11, 0.3, 1)), Error);
}

TEST(Summary, OneCommunity) {
  const auto g = fixture_wcc();
  std::map<std::string, int> all;
  for (const auto& [n, _] : g.nodes()) all[n] = 0;
  const auto s = summarize_communities(g, Partition::from_labels(all), vaxnet::test::fixture_dataset(), 5);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].node_share, 1.0);
  EXPECT_DOUBLE_EQ(s[0].retweet_share, 1.0);
}

TEST(Summary, FixtureShares) {
  const auto g = fixture_wcc();
  const auto s = summarize_communities(g, fixture_partition(), vaxnet::test::fixture_dataset(), 3);
  ASSERT_EQ(s.size(), 2u);
  for (const auto& c : s) {
    const auto share = fixture_golden()["retweet_share"][std::to_string(c.id)];
    EXPECT_DOUBLE_EQ(c.retweet_share, share[0].get<double>() / share[1].get<double>());
    EXPECT_DOUBLE_EQ(c.node_share, 0.5);
  }
  const auto& anti = s[0].id == 0 ? s[0] : s[1];
  const auto& other = s[0].id == 0 ? s[1] : s[0];
  using Tag = std::pair<std::string, std::size_t>;
  EXPECT_EQ(anti.top_hashtags, (std::vector<Tag>{{"mykidsmychoice", 2}, {"vaccineroulette", 2}, {"illuminati", 1}}));
  EXPECT_TRUE(anti.top_verified.empty());
  using Handle = std::pair<std::string, std::uint64_t>;
  EXPECT_EQ(other.top_verified, (std::vector<Handle>{{"healthdept", 4}, {"sci_frank", 1}}));
}

TEST(Labels, ExactlyChosenCommunity) {
  const auto p = Partition::from_labels({{"a", 0}, {"b", 1}, {"c", 1}, {"d", 0}});
  const auto l = label_binary(p, 1);
  EXPECT_EQ(l.at("a"), Label::other);
  EXPECT_EQ(l.at("b"), Label::antivaxx);
  EXPECT_EQ(l.at("c"), Label::antivaxx);
  EXPECT_EQ(l.at("d"), Label::other);
}

TEST(Labels, UnknownCommunityIsError) {
  const auto p = Partition::from_labels({{"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}, {"e", 4}});
  EXPECT_THROW(label_binary(p, 7), Error);
  EXPECT_THROW(label_binary(p, -1), Error);
}

TEST(Labels, SyntheticPositivesEqualPlantedSize) {
  ingest::SynthConfig cfg;
  cfg.n_users = 300;
  const auto s = ingest::generate_synthetic(cfg, 1);
  std::map<std::string, int> planted(s.planted.begin(), s.planted.end());
  const auto labels = label_binary(Partition::from_labels(planted), planted.begin()->second);
  std::size_t pos = 0;
  for (const auto& [_, l] : labels) pos += l == Label::antivaxx;
  EXPECT_EQ(pos, 150u);
}

TEST(Suggest, MarkerCommunityWins) {
  std::vector<CommunitySummary> s(3);
  for (int i = 0; i < 3; ++i) s[i].id = i;
  s[0].top_hashtags = {{"vaccineswork", 9}};
  s[2].top_hashtags = {{"mykidsmychoice", 3}, {"other", 1}};
  const auto r = suggest_antivaxx_community(s, default_marker_hashtags());
  EXPECT_EQ(r.community, 2);
  EXPECT_EQ(r.overlap, 1u);
  EXPECT_FALSE(r.no_overlap);
}

TEST(Suggest, NoOverlapFallsBackToZero) {
  std::vector<CommunitySummary> s(2);
  s[0].id = 1;
  s[1].id = 0;
  const auto r = suggest_antivaxx_community(s, default_marker_hashtags());
  EXPECT_EQ(r.community, 0);
  EXPECT_TRUE(r.no_overlap);
}

TEST(Suggest, SyntheticPlantedCommunity) {
  ingest::SynthConfig cfg;
  cfg.n_users = 400;
  cfg.n_communities = 4;
  const auto s = ingest::generate_synthetic(cfg, 3);
  const auto g = graph::principal_wcc(graph::build_network(s.dataset));
  const auto p = louvain(g, 1);
  const auto summaries = summarize_communities(g, p, s.dataset, 10);
  const auto r = suggest_antivaxx_community(summaries, default_marker_hashtags());
  ASSERT_FALSE(r.no_overlap);
  std::size_t planted_zero = 0, members = 0;
  for (const auto& [author, c] : p.assignment) {
    if (c != r.community) continue;
    ++members;
    planted_zero += s.planted.at(author) == 0;
  }
  EXPECT_GT(static_cast<double>(planted_zero) / static_cast<double>(members), 0.9);
}

TEST(Files, PartitionAndLabelsRoundTrip) {
  const auto p = fixture_partition();
  std::ostringstream out;
  write_partition(out, p);
  std::istringstream in(out.str());
  EXPECT_EQ(read_partition(in), p);

  const auto l = label_binary(p, 0);
  std::ostringstream lout;
  write_labels(lout, l);
  std::istringstream lin(lout.str());
  EXPECT_EQ(read_labels(lin), l);
}

TEST(Files, RejectsSparseIds) {
  std::istringstream in("a\t0\nb\t2\n");
  EXPECT_THROW(read_partition(in), Error);
}
