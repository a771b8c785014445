#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vaxnet/graph.hpp"
#include "vaxnet/ingest.hpp"

using namespace vaxnet;
using namespace vaxnet::graph;
using vaxnet::test::fixture_golden;
using vaxnet::test::make_graph;

namespace {

RetweetNetwork fixture_network() {
  return build_network(ingest::filter_retweet_only_users(vaxnet::test::fixture_dataset()));
}

}  // namespace

TEST(Build, SingleRetweet) {
  ingest::Dataset d;
  const auto a = vaxnet::test::original("1", "A", 1, "vax");
  d.posts = {a, vaxnet::test::retweet("2", "B", 2, a)};
  const auto g = build_network(d);
  EXPECT_EQ(g.node_count(), 2u);
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.edges().at({"A", "B"}), 1u);
}

TEST(Build, SelfRetweetDropped) {
  ingest::Dataset d;
  const auto a = vaxnet::test::original("1", "A", 1, "vax");
  d.posts = {a, vaxnet::test::retweet("2", "A", 2, a)};
  const auto g = build_network(d);
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.total_weight(), 0u);
}

TEST(Build, AbsentRetweeteeStillBecomesNode) {
  ingest::Dataset d;
  ingest::RawPost rt = vaxnet::test::original("2", "B", 2, "vax");
  rt.is_retweet = true;
  rt.retweeted_post_id = "ghost-post";
  rt.retweeted_author_id = "Ghost";
  d.posts = {rt};
  const auto g = build_network(d);
  EXPECT_TRUE(g.contains("Ghost"));
  EXPECT_EQ(g.edges().at({"Ghost", "B"}), 1u);
}

TEST(Build, Fixture) {
  const auto g = fixture_network();
  const auto& golden = fixture_golden()["network"];
  EXPECT_EQ(g.node_count(), golden["nodes"].get<std::size_t>());
  EXPECT_EQ(g.edge_count(), golden["edges"].get<std::size_t>());
  EXPECT_EQ(g.total_weight(), golden["total_weight"].get<std::uint64_t>());
  for (const auto& e : golden["edge_list"]) {
    EXPECT_EQ(g.edges().at({e[0].get<std::string>(), e[1].get<std::string>()}), e[2].get<std::uint64_t>());
  }
}

TEST(Build, VerifiedMetadataCarried) {
  const auto g = fixture_network();
  EXPECT_TRUE(g.nodes().at("D").verified);
  EXPECT_EQ(g.nodes().at("D").handle, "healthdept");
  EXPECT_FALSE(g.nodes().at("A").verified);
}

TEST(Wcc, ConnectedGraphUnchanged) {
  const auto g = make_graph({{"a", "b", 1}, {"b", "c", 2}, {"c", "a", 1}});
  EXPECT_EQ(principal_wcc(g), g);
}

TEST(Wcc, LargestComponentKept) {
  const auto g = make_graph({{"a", "b", 1}, {"b", "c", 1}, {"d", "c", 1}, {"e", "d", 1}, {"x", "y", 4}});
  const auto p = principal_wcc(g);
  EXPECT_EQ(p.node_count(), 5u);
  EXPECT_FALSE(p.contains("x"));
  EXPECT_EQ(p.total_weight(), 4u);
}

TEST(Wcc, TieBrokenBySmallestAuthor) {
  const auto g = make_graph({{"m", "n", 1}, {"b", "z", 5}});
  const auto p = principal_wcc(g);
  EXPECT_TRUE(p.contains("b"));
  EXPECT_TRUE(p.contains("z"));
  EXPECT_FALSE(p.contains("m"));
}

TEST(Wcc, EmptyGraph) { EXPECT_EQ(principal_wcc(RetweetNetwork{}).node_count(), 0u); }

TEST(Wcc, FixtureMatchesBfsOracle) {
  const auto p = principal_wcc(fixture_network());
  std::vector<std::string> nodes;
  for (const auto& [n, _] : p.nodes()) nodes.push_back(n);
  EXPECT_EQ(nodes, fixture_golden()["principal_wcc"].get<std::vector<std::string>>());
  EXPECT_EQ(p.total_weight(), 13u);
}

TEST(Stats, SingleEdge) {
  const auto s = network_stats(make_graph({{"u", "v", 3}}));
  EXPECT_EQ(s.total_weight, 3u);
  EXPECT_EQ(s.strength.at("u").out, 3u);
  EXPECT_EQ(s.strength.at("u").in, 0u);
  EXPECT_EQ(s.strength.at("v").in, 3u);
}

TEST(Stats, Empty) {
  const auto s = network_stats(RetweetNetwork{});
  EXPECT_EQ(s.nodes, 0u);
  EXPECT_EQ(s.edges, 0u);
  EXPECT_EQ(s.total_weight, 0u);
  EXPECT_TRUE(s.strength.empty());
}

TEST(Stats, FixtureStrengths) {
  const auto s = network_stats(fixture_network());
  for (const auto& [node, st] : fixture_golden()["network"]["strength"].items()) {
    EXPECT_EQ(s.strength.at(node).in, st["in"].get<std::uint64_t>()) << node;
    EXPECT_EQ(s.strength.at(node).out, st["out"].get<std::uint64_t>()) << node;
  }
}

TEST(Serialization, RoundTrip) {
  const auto g = fixture_network();
  std::ostringstream edges, nodes;
  write_edges(edges, g);
  write_nodes(nodes, g);
  std::istringstream ein(edges.str()), nin(nodes.str());
  EXPECT_EQ(read_network(ein, &nin), g);
}

TEST(Serialization, EdgeListFormat) {
  std::ostringstream out;
  write_edges(out, make_graph({{"b", "a", 2}, {"a", "b", 1}}));
  EXPECT_EQ(out.str(), "a\tb\t1\nb\ta\t2\n");
}

TEST(Serialization, RejectsMalformedEdges) {
  for (const std::string bad : {"a\tb\n", "a\ta\t1\n", "a\tb\t0\n", "a\tb\tx\n", "a\tb\t1\na\tb\t2\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_network(in), Error) << bad;
  }
}
