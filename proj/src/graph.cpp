#include "vaxnet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "vaxnet/error.hpp"
#include "vaxnet/ingest.hpp"

namespace vaxnet::graph {

void RetweetNetwork::add_node(const std::string& author, NodeInfo info) {
  auto [it, inserted] = nodes_.try_emplace(author, std::move(info));
  if (!inserted && it->second == NodeInfo{} && !(info == NodeInfo{})) it->second = std::move(info);
}

bool RetweetNetwork::add_weight(const std::string& from, const std::string& to,
                                std::uint64_t weight) {
  if (from == to || weight == 0) return false;
  nodes_.try_emplace(from);
  nodes_.try_emplace(to);
  edges_[{from, to}] += weight;
  total_weight_ += weight;
  return true;
}

RetweetNetwork RetweetNetwork::induced(const std::vector<std::string>& keep) const {
  RetweetNetwork sub;
  for (const auto& id : keep) {
    if (const auto it = nodes_.find(id); it != nodes_.end()) sub.nodes_.emplace(id, it->second);
  }
  for (const auto& [key, w] : edges_) {
    if (sub.nodes_.contains(key.first) && sub.nodes_.contains(key.second)) {
      sub.edges_.emplace(key, w);
      sub.total_weight_ += w;
    }
  }
  return sub;
}

RetweetNetwork build_network(const ingest::Dataset& dataset) {
  // Profile fields can change between posts; the latest post (ties broken by
  // post_id) decides, so the result does not depend on input order.
  std::map<std::string, const ingest::RawPost*> latest;
  for (const auto& post : dataset.posts) {
    auto [it, inserted] = latest.try_emplace(post.author_id, &post);
    const auto* cur = it->second;
    if (!inserted && std::tie(post.timestamp, post.post_id) > std::tie(cur->timestamp, cur->post_id)) it->second = &post;
  }
  RetweetNetwork g;
  for (const auto& [author, post] : latest) g.add_node(author, {post->author_handle, post->is_verified});
  for (const auto& post : dataset.posts) {
    if (post.is_retweet) g.add_weight(*post.retweeted_author_id, post.author_id);
  }
  return g;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::vector<std::string>> weak_components(const RetweetNetwork& g) {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  for (const auto& [id, _] : g.nodes()) {
    index.emplace(id, names.size());
    names.push_back(id);
  }
  DisjointSets sets(names.size());
  for (const auto& [key, _] : g.edges()) sets.unite(index.at(key.first), index.at(key.second));

  // Roots are minimal indices, and names are sorted, so each root's name is
  // the component's smallest author_id.
  std::map<std::size_t, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < names.size(); ++i) by_root[sets.find(i)].push_back(names[i]);
  std::vector<std::vector<std::string>> components;
  for (auto& [_, members] : by_root) components.push_back(std::move(members));
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return components;
}

RetweetNetwork principal_wcc(const RetweetNetwork& g) {
  const auto components = weak_components(g);
  if (components.empty()) return {};
  return g.induced(components.front());
}

NetworkStats network_stats(const RetweetNetwork& g) {
  NetworkStats s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  s.total_weight = g.total_weight();
  for (const auto& [id, _] : g.nodes()) s.strength.emplace(id, Strength{});
  for (const auto& [key, w] : g.edges()) {
    s.strength[key.first].out += w;
    s.strength[key.second].in += w;
  }
  return s;
}

void write_edges(std::ostream& out, const RetweetNetwork& g) {
  for (const auto& [key, w] : g.edges()) out << key.first << '\t' << key.second << '\t' << w << '\n';
}

void write_nodes(std::ostream& out, const RetweetNetwork& g) {
  for (const auto& [id, info] : g.nodes()) {
    out << id << '\t' << info.handle << '\t' << (info.verified ? 1 : 0) << '\n';
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

}  // namespace

RetweetNetwork read_network(std::istream& edges, std::istream* nodes) {
  RetweetNetwork g;
  std::string line;
  std::size_t line_no = 0;
  if (nodes != nullptr) {
    while (std::getline(*nodes, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 3 || f[0].empty() || (f[2] != "0" && f[2] != "1")) {
        throw ParseError(line_no, "expected author_id<TAB>handle<TAB>0|1 in nodes file");
      }
      g.add_node(f[0], {f[1], f[2] == "1"});
    }
  }
  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    std::uint64_t w = 0;
    if (f.size() != 3 || f[0].empty() || f[1].empty() ||
        std::from_chars(f[2].data(), f[2].data() + f[2].size(), w).ec != std::errc{} || w == 0) {
      throw ParseError(line_no, "expected u<TAB>v<TAB>positive-weight in edge list");
    }
    if (f[0] == f[1]) throw ParseError(line_no, "self-loop in edge list");
    if (g.edges().contains({f[0], f[1]})) throw ParseError(line_no, "duplicate edge");
    g.add_weight(f[0], f[1], w);
  }
  return g;
}

}  // namespace vaxnet::graph
