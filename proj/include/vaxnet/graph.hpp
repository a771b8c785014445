#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace vaxnet::ingest {
struct Dataset;
}

namespace vaxnet::graph {

struct NodeInfo {
  std::string handle;
  bool verified = false;

  friend bool operator==(const NodeInfo&, const NodeInfo&) = default;
};

/// Weighted directed influence graph: edge u -> v counts the times v
/// retweeted u. Self-loops are never stored.
class RetweetNetwork {
 public:
  using EdgeKey = std::pair<std::string, std::string>;

  void add_node(const std::string& author, NodeInfo info = {});
  /// Adds `weight` to edge from -> to, creating endpoints. Ignores self-loops
  /// and returns whether the edge was recorded.
  bool add_weight(const std::string& from, const std::string& to, std::uint64_t weight = 1);

  const std::map<std::string, NodeInfo>& nodes() const noexcept { return nodes_; }
  const std::map<EdgeKey, std::uint64_t>& edges() const noexcept { return edges_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::uint64_t total_weight() const noexcept { return total_weight_; }
  bool contains(const std::string& author) const { return nodes_.contains(author); }

  /// Subgraph induced by `keep` (authors absent from the network are ignored).
  RetweetNetwork induced(const std::vector<std::string>& keep) const;

  friend bool operator==(const RetweetNetwork& a, const RetweetNetwork& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::map<std::string, NodeInfo> nodes_;
  std::map<EdgeKey, std::uint64_t> edges_;
  std::uint64_t total_weight_ = 0;
};

/// Nodes are authors of originals plus both endpoints of every retweet;
/// self-retweets are discarded.
RetweetNetwork build_network(const ingest::Dataset& dataset);

/// Node sets of the weakly connected components, largest first; equal sizes
/// ordered by their smallest author_id. Each set is sorted.
std::vector<std::vector<std::string>> weak_components(const RetweetNetwork& g);

/// Induced subgraph on the largest weakly connected component.
RetweetNetwork principal_wcc(const RetweetNetwork& g);

struct Strength {
  std::uint64_t in = 0;
  std::uint64_t out = 0;

  friend bool operator==(const Strength&, const Strength&) = default;
};

struct NetworkStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint64_t total_weight = 0;
  std::map<std::string, Strength> strength;
};

NetworkStats network_stats(const RetweetNetwork& g);

/// Edge list TSV `u<TAB>v<TAB>weight`, sorted by (u, v).
void write_edges(std::ostream& out, const RetweetNetwork& g);
/// Nodes TSV `author_id<TAB>handle<TAB>verified`, sorted by author_id.
void write_nodes(std::ostream& out, const RetweetNetwork& g);
/// Reads an edge list; a nodes file, when given, adds metadata and isolated nodes.
RetweetNetwork read_network(std::istream& edges, std::istream* nodes = nullptr);

}  // namespace vaxnet::graph
