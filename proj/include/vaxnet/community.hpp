#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vaxnet/graph.hpp"

namespace vaxnet::ingest {
struct Dataset;
}

namespace vaxnet::community {

/// Community membership of every node, ids dense in [0, community_count).
struct Partition {
  std::map<std::string, int> assignment;
  int community_count = 0;

  /// Builds a partition, renumbering ids densely by first appearance in
  /// author_id order.
  static Partition from_labels(const std::map<std::string, int>& labels);

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Newman modularity of `p` on the symmetrized graph w'(u,v) = w(u,v) + w(v,u),
/// with the null-model term scaled by `resolution`. Zero for an edgeless graph.
/// Throws if `p` misses a node of `g`.
double modularity(const graph::RetweetNetwork& g, const Partition& p, double resolution = 1.0);

namespace serial {
double modularity(const graph::RetweetNetwork& g, const Partition& p, double resolution = 1.0);
}

struct LouvainTrace {
  /// Modularity after each local-move pass, across all levels.
  std::vector<double> pass_modularity;
  int levels = 0;
};

/// Two-phase local-move / aggregation modularity maximization. Node visit
/// order is shuffled by `seed`; stops when a level makes no move.
Partition louvain(const graph::RetweetNetwork& g, std::uint64_t seed, double resolution = 1.0,
                  LouvainTrace* trace = nullptr);

/// Exact optimum by enumerating all set partitions. At most 10 nodes.
std::pair<Partition, double> brute_force_best_partition(const graph::RetweetNetwork& g);

struct CommunitySummary {
  int id = 0;
  std::size_t size = 0;
  double node_share = 0.0;
  /// Weight of edges whose source is a member, over total weight.
  double retweet_share = 0.0;
  std::vector<std::pair<std::string, std::size_t>> top_hashtags;
  /// Verified member handles ranked by times retweeted.
  std::vector<std::pair<std::string, std::uint64_t>> top_verified;
};

/// Per-community shares and characterizations, largest community first.
std::vector<CommunitySummary> summarize_communities(const graph::RetweetNetwork& g,
                                                    const Partition& p,
                                                    const ingest::Dataset& dataset,
                                                    std::size_t top_k);

enum class Label : int { other = 0, antivaxx = 1 };
using BinaryLabels = std::map<std::string, Label>;

BinaryLabels label_binary(const Partition& p, int antivaxx_id);

const std::vector<std::string>& default_marker_hashtags();

struct Suggestion {
  int community = 0;
  std::size_t overlap = 0;
  /// No community's top hashtags intersect the markers.
  bool no_overlap = false;
};

/// Community whose top hashtags share the most markers; ties to the smaller id.
Suggestion suggest_antivaxx_community(const std::vector<CommunitySummary>& summaries,
                                      const std::vector<std::string>& marker_hashtags);

void write_partition(std::ostream& out, const Partition& p);
Partition read_partition(std::istream& in);

void write_labels(std::ostream& out, const BinaryLabels& labels);
BinaryLabels read_labels(std::istream& in);

std::string summaries_to_json(const std::vector<CommunitySummary>& summaries);

}  // namespace vaxnet::community
