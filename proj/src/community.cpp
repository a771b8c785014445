#include "vaxnet/community.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include <omp.h>

#include <nlohmann/json.hpp>

#include "vaxnet/error.hpp"
#include "vaxnet/ingest.hpp"
#include "vaxnet/rng.hpp"

namespace vaxnet::community {

Partition Partition::from_labels(const std::map<std::string, int>& labels) {
  Partition p;
  std::map<int, int> dense;
  for (const auto& [author, label] : labels) {
    const auto [it, inserted] = dense.try_emplace(label, p.community_count);
    if (inserted) ++p.community_count;
    p.assignment.emplace(author, it->second);
  }
  return p;
}

namespace {

struct IndexedEdges {
  std::vector<int> community;  // per node, dense ids
  int community_count = 0;
  std::vector<std::size_t> src, dst;
  std::vector<std::uint64_t> weight;
};

IndexedEdges index_graph(const graph::RetweetNetwork& g, const Partition& p) {
  IndexedEdges e;
  std::map<std::string, std::size_t> index;
  std::map<int, int> dense;
  for (const auto& [id, _] : g.nodes()) {
    const auto it = p.assignment.find(id);
    if (it == p.assignment.end()) throw Error("partition misses node '" + id + "'");
    const auto [d, inserted] = dense.try_emplace(it->second, e.community_count);
    if (inserted) ++e.community_count;
    index.emplace(id, e.community.size());
    e.community.push_back(d->second);
  }
  for (const auto& [key, w] : g.edges()) {
    e.src.push_back(index.at(key.first));
    e.dst.push_back(index.at(key.second));
    e.weight.push_back(w);
  }
  return e;
}

double assemble_q(const std::vector<std::uint64_t>& internal, const std::vector<std::uint64_t>& tot,
                  std::uint64_t total_weight, double resolution) {
  if (total_weight == 0) return 0.0;
  const double two_m = 2.0 * static_cast<double>(total_weight);
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = static_cast<double>(tot[c]) / two_m;
    q += static_cast<double>(internal[c]) / two_m - resolution * share * share;
  }
  return q;
}

}  // namespace

double modularity(const graph::RetweetNetwork& g, const Partition& p, double resolution) {
  const auto e = index_graph(g, p);
  const std::size_t k = static_cast<std::size_t>(e.community_count);
  const auto n_edges = static_cast<std::ptrdiff_t>(e.weight.size());
  const int threads = omp_get_max_threads();
  // Integer partial sums per thread: the reduction is exact, hence order-free.
  std::vector<std::vector<std::uint64_t>> internal(threads, std::vector<std::uint64_t>(k));
  std::vector<std::vector<std::uint64_t>> tot(threads, std::vector<std::uint64_t>(k));
#pragma omp parallel num_threads(threads)
  {
    auto& in_local = internal[omp_get_thread_num()];
    auto& tot_local = tot[omp_get_thread_num()];
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_edges; ++i) {
      const int cu = e.community[e.src[i]];
      const int cv = e.community[e.dst[i]];
      if (cu == cv) in_local[cu] += 2 * e.weight[i];
      tot_local[cu] += e.weight[i];
      tot_local[cv] += e.weight[i];
    }
  }
  for (int t = 1; t < threads; ++t) {
    for (std::size_t c = 0; c < k; ++c) {
      internal[0][c] += internal[t][c];
      tot[0][c] += tot[t][c];
    }
  }
  return assemble_q(internal[0], tot[0], g.total_weight(), resolution);
}

namespace serial {
double modularity(const graph::RetweetNetwork& g, const Partition& p, double resolution) {
  const auto e = index_graph(g, p);
  std::vector<std::uint64_t> internal(e.community_count), tot(e.community_count);
  for (std::size_t i = 0; i < e.weight.size(); ++i) {
    const int cu = e.community[e.src[i]];
    const int cv = e.community[e.dst[i]];
    if (cu == cv) internal[cu] += 2 * e.weight[i];
    tot[cu] += e.weight[i];
    tot[cv] += e.weight[i];
  }
  return assemble_q(internal, tot, g.total_weight(), resolution);
}
}  // namespace serial

// ---------------------------------------------------------------------------
// Louvain

namespace {

/// Symmetric weighted graph with self-loops, as seen by one Louvain level.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // excludes self-loops
  std::vector<double> self;                              // A_ii
  std::vector<double> degree;                            // k_i = sum_j A_ij
  double two_m = 0.0;

  int size() const { return static_cast<int>(adj.size()); }
};

LevelGraph symmetrize(const graph::RetweetNetwork& g, const std::map<std::string, int>& index) {
  const std::size_t n = index.size();
  std::vector<std::map<int, double>> acc(n);
  for (const auto& [key, w] : g.edges()) {
    const int u = index.at(key.first);
    const int v = index.at(key.second);
    acc[u][v] += static_cast<double>(w);
    acc[v][u] += static_cast<double>(w);
  }
  LevelGraph lg;
  lg.adj.resize(n);
  lg.self.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : acc[i]) {
      lg.adj[i].emplace_back(j, w);
      lg.degree[i] += w;
    }
    lg.two_m += lg.degree[i];
  }
  return lg;
}

double level_modularity(const LevelGraph& lg, const std::vector<int>& comm, double resolution) {
  if (lg.two_m == 0.0) return 0.0;
  std::vector<double> internal(lg.size(), 0.0), tot(lg.size(), 0.0);
  for (int i = 0; i < lg.size(); ++i) {
    internal[comm[i]] += lg.self[i];
    tot[comm[i]] += lg.degree[i];
    for (const auto& [j, w] : lg.adj[i]) {
      if (comm[j] == comm[i]) internal[comm[i]] += w;
    }
  }
  double q = 0.0;
  for (int c = 0; c < lg.size(); ++c) {
    const double share = tot[c] / lg.two_m;
    q += internal[c] / lg.two_m - resolution * share * share;
  }
  return q;
}

/// Local-move phase. Returns the number of node moves over all passes.
std::size_t move_nodes(const LevelGraph& lg, std::vector<int>& comm, double resolution, Rng& rng,
                       LouvainTrace* trace) {
  const int n = lg.size();
  std::vector<double> tot(lg.degree);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));

  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<int> touched;
  std::size_t total_moves = 0;
  constexpr double kMinGain = 1e-12;

  while (true) {
    std::size_t moves = 0;
    for (const int i : order) {
      const int current = comm[i];
      const double k_i = lg.degree[i];
      touched.clear();
      touched.push_back(current);
      seen[current] = 1;
      for (const auto& [j, w] : lg.adj[i]) {
        const int c = comm[j];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += w;
      }
      tot[current] -= k_i;
      int best = current;
      double best_gain = link[current] - resolution * tot[current] * k_i / lg.two_m;
      for (const int c : touched) {
        const double gain = link[c] - resolution * tot[c] * k_i / lg.two_m;
        if (gain > best_gain + kMinGain) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += k_i;
      comm[i] = best;
      if (best != current) ++moves;
      for (const int c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
    }
    total_moves += moves;
    if (trace != nullptr) trace->pass_modularity.push_back(level_modularity(lg, comm, resolution));
    if (moves == 0) break;
  }
  return total_moves;
}

/// Renumbers `comm` densely in node order; returns the community count.
int renumber(std::vector<int>& comm) {
  std::map<int, int> dense;
  for (auto& c : comm) {
    const auto [it, _] = dense.try_emplace(c, static_cast<int>(dense.size()));
    c = it->second;
  }
  return static_cast<int>(dense.size());
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& comm, int count) {
  std::vector<std::map<int, double>> acc(count);
  LevelGraph next;
  next.self.assign(count, 0.0);
  next.degree.assign(count, 0.0);
  for (int i = 0; i < lg.size(); ++i) {
    const int a = comm[i];
    next.self[a] += lg.self[i];
    next.degree[a] += lg.degree[i];
    for (const auto& [j, w] : lg.adj[i]) {
      const int b = comm[j];
      if (a == b) {
        next.self[a] += w;
      } else {
        acc[a][b] += w;
      }
    }
  }
  next.adj.resize(count);
  for (int a = 0; a < count; ++a) {
    for (const auto& [b, w] : acc[a]) next.adj[a].emplace_back(b, w);
  }
  next.two_m = lg.two_m;
  return next;
}

}  // namespace

Partition louvain(const graph::RetweetNetwork& g, std::uint64_t seed, double resolution,
                  LouvainTrace* trace) {
  if (g.node_count() == 0) throw Error("louvain: empty graph");
  if (!(resolution > 0.0)) throw Error("louvain: resolution must be positive");
  std::map<std::string, int> index;
  for (const auto& [id, _] : g.nodes()) index.emplace(id, static_cast<int>(index.size()));

  LevelGraph lg = symmetrize(g, index);
  std::vector<int> node_comm(index.size());
  std::iota(node_comm.begin(), node_comm.end(), 0);
  Rng rng(seed);

  while (true) {
    std::vector<int> comm(lg.size());
    std::iota(comm.begin(), comm.end(), 0);
    const std::size_t moves = move_nodes(lg, comm, resolution, rng, trace);
    if (trace != nullptr) ++trace->levels;
    if (moves == 0) break;
    const int count = renumber(comm);
    for (auto& c : node_comm) c = comm[c];
    if (count == lg.size()) break;
    lg = aggregate(lg, comm, count);
  }

  std::map<std::string, int> labels;
  for (const auto& [id, i] : index) labels.emplace(id, node_comm[i]);
  return Partition::from_labels(labels);
}

std::pair<Partition, double> brute_force_best_partition(const graph::RetweetNetwork& g) {
  const std::size_t n = g.node_count();
  if (n > 10) throw Error("brute_force_best_partition: more than 10 nodes");
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  for (const auto& [id, _] : g.nodes()) {
    index.emplace(id, names.size());
    names.push_back(id);
  }
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<double> strength(n, 0.0);
  for (const auto& [key, weight] : g.edges()) {
    const auto u = index.at(key.first), v = index.at(key.second);
    w[u][v] += static_cast<double>(weight);
    w[v][u] += static_cast<double>(weight);
    strength[u] += static_cast<double>(weight);
    strength[v] += static_cast<double>(weight);
  }
  const double two_m = 2.0 * static_cast<double>(g.total_weight());

  const auto score = [&](const std::vector<int>& a, int blocks) {
    if (two_m == 0.0) return 0.0;
    std::vector<double> internal(blocks, 0.0), tot(blocks, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      tot[a[i]] += strength[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a[i] == a[j]) internal[a[i]] += 2.0 * w[i][j];
      }
    }
    double q = 0.0;
    for (int c = 0; c < blocks; ++c) q += internal[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
    return q;
  };

  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<int> a(n, 0), prefix_max(n, 0), best;
  double best_q = -1.0;
  if (n == 0) return {Partition{}, 0.0};
  while (true) {
    const int blocks = prefix_max[n - 1] + 1;
    const double q = score(a, blocks);
    if (best.empty() || q > best_q + 1e-12) {
      best = a;
      best_q = q;
    }
    std::size_t i = n - 1;
    while (i > 0 && a[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < n; ++i) labels.emplace(names[i], best[i]);
  return {Partition::from_labels(labels), best_q};
}

// ---------------------------------------------------------------------------

std::vector<CommunitySummary> summarize_communities(const graph::RetweetNetwork& g,
                                                    const Partition& p,
                                                    const ingest::Dataset& dataset,
                                                    std::size_t top_k) {
  std::map<int, CommunitySummary> by_id;
  std::map<std::string, std::uint64_t> times_retweeted;
  for (const auto& [id, _] : g.nodes()) {
    const auto it = p.assignment.find(id);
    if (it == p.assignment.end()) throw Error("partition misses node '" + id + "'");
    auto& s = by_id[it->second];
    s.id = it->second;
    ++s.size;
  }
  for (const auto& [key, w] : g.edges()) {
    by_id[p.assignment.at(key.first)].retweet_share += static_cast<double>(w);
    times_retweeted[key.first] += w;
  }

  std::map<int, std::map<std::string, std::size_t>> hashtags;
  for (const auto& post : dataset.posts) {
    if (post.is_retweet || !g.contains(post.author_id)) continue;
    auto& counts = hashtags[p.assignment.at(post.author_id)];
    for (const auto& tag : post.hashtags) ++counts[tag];
  }

  std::map<int, std::vector<std::pair<std::string, std::uint64_t>>> verified;
  for (const auto& [id, info] : g.nodes()) {
    if (!info.verified) continue;
    const auto rt = times_retweeted.contains(id) ? times_retweeted.at(id) : 0;
    verified[p.assignment.at(id)].emplace_back(info.handle.empty() ? id : info.handle, rt);
  }

  const auto rank = [top_k](auto items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (items.size() > top_k) items.resize(top_k);
    return items;
  };

  const double n_nodes = static_cast<double>(g.node_count());
  const double total = static_cast<double>(g.total_weight());
  std::vector<CommunitySummary> out;
  for (auto& [id, s] : by_id) {
    s.node_share = static_cast<double>(s.size) / n_nodes;
    s.retweet_share = total > 0.0 ? s.retweet_share / total : 0.0;
    const auto& counts = hashtags[id];
    s.top_hashtags = rank(std::vector<std::pair<std::string, std::size_t>>(counts.begin(), counts.end()));
    s.top_verified = rank(verified[id]);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.size > b.size; });
  return out;
}

BinaryLabels label_binary(const Partition& p, int antivaxx_id) {
  if (antivaxx_id < 0 || antivaxx_id >= p.community_count) {
    throw Error("unknown community id " + std::to_string(antivaxx_id) + " (partition has " +
                std::to_string(p.community_count) + " communities)");
  }
  BinaryLabels labels;
  for (const auto& [author, c] : p.assignment) {
    labels.emplace(author, c == antivaxx_id ? Label::antivaxx : Label::other);
  }
  return labels;
}

const std::vector<std::string>& default_marker_hashtags() {
  static const std::vector<std::string> markers = {"illuminati", "praybig", "notest",
                                                   "mykidsmychoice", "vaccineroulette"};
  return markers;
}

Suggestion suggest_antivaxx_community(const std::vector<CommunitySummary>& summaries,
                                      const std::vector<std::string>& marker_hashtags) {
  if (summaries.empty()) throw Error("suggest_antivaxx_community: no communities");
  std::set<std::string> markers;
  for (auto m : marker_hashtags) {
    if (!m.empty() && m.front() == '#') m.erase(0, 1);
    std::transform(m.begin(), m.end(), m.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    markers.insert(m);
  }
  Suggestion best{0, 0, true};
  bool found = false;
  for (const auto& s : summaries) {
    std::size_t overlap = 0;
    for (const auto& [tag, _] : s.top_hashtags) overlap += markers.contains(tag) ? 1 : 0;
    if (overlap == 0) continue;
    if (!found || overlap > best.overlap || (overlap == best.overlap && s.id < best.community)) {
      best = {s.id, overlap, false};
      found = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

void write_partition(std::ostream& out, const Partition& p) {
  for (const auto& [author, c] : p.assignment) out << author << '\t' << c << '\n';
}

Partition read_partition(std::istream& in) {
  Partition p;
  std::string line;
  std::size_t line_no = 0;
  std::set<int> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    int c = -1;
    if (tab == std::string::npos || tab == 0 ||
        std::from_chars(line.data() + tab + 1, line.data() + line.size(), c).ec != std::errc{} ||
        c < 0) {
      throw ParseError(line_no, "expected author_id<TAB>community_id");
    }
    if (!p.assignment.emplace(line.substr(0, tab), c).second) {
      throw ParseError(line_no, "duplicate author in partition");
    }
    ids.insert(c);
  }
  p.community_count = static_cast<int>(ids.size());
  if (!ids.empty() && *ids.rbegin() != p.community_count - 1) {
    throw Error("partition community ids are not dense");
  }
  return p;
}

void write_labels(std::ostream& out, const BinaryLabels& labels) {
  for (const auto& [author, label] : labels) {
    out << author << '\t' << (label == Label::antivaxx ? "antivaxx" : "other") << '\n';
  }
}

BinaryLabels read_labels(std::istream& in) {
  BinaryLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(line_no, "expected author_id<TAB>label");
    const auto value = line.substr(tab + 1);
    Label label;
    if (value == "antivaxx" || value == "1") {
      label = Label::antivaxx;
    } else if (value == "other" || value == "0") {
      label = Label::other;
    } else {
      throw ParseError(line_no, "label must be antivaxx or other");
    }
    if (!labels.emplace(line.substr(0, tab), label).second) {
      throw ParseError(line_no, "duplicate author in labels");
    }
  }
  return labels;
}

std::string summaries_to_json(const std::vector<CommunitySummary>& summaries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    nlohmann::ordered_json j;
    j["community"] = s.id;
    j["size"] = s.size;
    j["node_share"] = s.node_share;
    j["retweet_share"] = s.retweet_share;
    j["top_hashtags"] = nlohmann::ordered_json::array();
    for (const auto& [tag, n] : s.top_hashtags) j["top_hashtags"].push_back({{"hashtag", tag}, {"count", n}});
    j["top_verified"] = nlohmann::ordered_json::array();
    for (const auto& [h, n] : s.top_verified) j["top_verified"].push_back({{"handle", h}, {"times_retweeted", n}});
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace vaxnet::community
