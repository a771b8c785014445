#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "vaxnet/error.hpp"
#include "vaxnet/models.hpp"

namespace vaxnet::models {
namespace {

double feature_value(const BowVector& x, std::int32_t feature) {
  const auto it = std::lower_bound(x.begin(), x.end(), feature,
                                   [](const features::BowEntry& e, std::int32_t f) { return e.index < f; });
  return it != x.end() && it->index == feature ? static_cast<double>(it->count) : 0.0;
}

struct FeatureStats {
  std::int32_t feature;
  std::size_t nonzero = 0;
  std::size_t positive = 0;
  double min = 0.0;
  double max = 0.0;
};

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

/// Weighted Gini impurity of a two-way split, up to a constant factor.
double gini(double n_left, double pos_left, double n_right, double pos_right) {
  double g = 0.0;
  if (n_left > 0) g += pos_left * (n_left - pos_left) / n_left;
  if (n_right > 0) g += pos_right * (n_right - pos_right) / n_right;
  return g;
}

class TreeBuilder {
 public:
  TreeBuilder(const LabeledSet<BowVector>& set, std::size_t vocab_size, const TrainConfig& cfg,
              std::size_t max_features)
      : set_(set), cfg_(cfg), max_features_(max_features), slot_(vocab_size, -1), chosen_(vocab_size, -1) {}

  DecisionTree grow(std::uint64_t seed) {
    Rng rng(seed);
    const auto n = set_.size();
    std::vector<std::uint32_t> rows(n);
    if (cfg_.bootstrap) {
      for (auto& r : rows) r = static_cast<std::uint32_t>(rng.index(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }

    struct Pending {
      std::int32_t node;
      std::size_t begin, end, depth;
    };
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, n, 0}};
    while (!stack.empty()) {
      const auto job = stack.back();
      stack.pop_back();
      const auto span = std::span(rows).subspan(job.begin, job.end - job.begin);
      std::size_t pos = 0;
      for (const auto r : span) pos += set_.labels[r] ? 1 : 0;
      tree.nodes[job.node].value = static_cast<double>(pos) / static_cast<double>(span.size());

      const bool pure = pos == 0 || pos == span.size();
      const bool deep = cfg_.max_depth > 0 && job.depth >= cfg_.max_depth;
      if (pure || deep || span.size() < cfg_.min_samples_split) continue;
      const auto split = best_split(span, pos, rng);
      if (split.feature < 0) continue;

      const auto mid = std::stable_partition(span.begin(), span.end(), [&](std::uint32_t r) {
        return feature_value(set_.samples[r], split.feature) <= split.threshold;
      });
      const auto n_left = static_cast<std::size_t>(mid - span.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[job.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, job.begin + n_left, job.end, job.depth + 1});
      stack.push_back({left, job.begin, job.begin + n_left, job.depth + 1});
    }
    return tree;
  }

 private:
  /// Best Gini split over a random subset of the features that vary within
  /// the node; feature -1 when every feature is constant.
  Split best_split(std::span<const std::uint32_t> rows, std::size_t pos, Rng& rng) {
    stats_.clear();
    for (const auto r : rows) {
      const bool y = set_.labels[r] != 0;
      for (const auto& e : set_.samples[r]) {
        auto& s = slot_[e.index];
        if (s < 0) {
          s = static_cast<std::int32_t>(stats_.size());
          stats_.push_back({e.index, 0, 0, static_cast<double>(e.count), static_cast<double>(e.count)});
        }
        auto& st = stats_[s];
        ++st.nonzero;
        st.positive += y ? 1 : 0;
        st.min = std::min(st.min, static_cast<double>(e.count));
        st.max = std::max(st.max, static_cast<double>(e.count));
      }
    }
    for (const auto& st : stats_) slot_[st.feature] = -1;

    pool_.clear();
    for (const auto& st : stats_) {
      if (st.nonzero < rows.size() || st.min != st.max) pool_.push_back(st);
    }
    if (pool_.empty()) return {};
    std::sort(pool_.begin(), pool_.end(), [](const auto& a, const auto& b) { return a.feature < b.feature; });

    const auto k = std::min(max_features_, pool_.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool_[i], pool_[i + rng.index(pool_.size() - i)]);
    }
    pool_.resize(k);

    values_.assign(k, {});
    for (std::size_t c = 0; c < k; ++c) chosen_[pool_[c].feature] = static_cast<std::int32_t>(c);
    for (const auto r : rows) {
      const int y = set_.labels[r] ? 1 : 0;
      for (const auto& e : set_.samples[r]) {
        if (const auto c = chosen_[e.index]; c >= 0) values_[c].push_back({static_cast<double>(e.count), y});
      }
    }
    for (std::size_t c = 0; c < k; ++c) chosen_[pool_[c].feature] = -1;

    const double n = static_cast<double>(rows.size());
    const double n_pos = static_cast<double>(pos);
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      auto& vals = values_[c];
      std::sort(vals.begin(), vals.end());
      // Left side starts with the implicit zeros.
      double n_left = n - static_cast<double>(vals.size());
      double pos_left = n_pos - static_cast<double>(pool_[c].positive);
      double prev = 0.0;
      std::size_t i = 0;
      if (n_left == 0) {
        prev = vals[0].first;
        while (i < vals.size() && vals[i].first == prev) {
          n_left += 1;
          pos_left += vals[i].second;
          ++i;
        }
      }
      while (i < vals.size()) {
        const double next = vals[i].first;
        const double g = gini(n_left, pos_left, n - n_left, n_pos - pos_left);
        if (g < best.impurity) best = {pool_[c].feature, 0.5 * (prev + next), g};
        while (i < vals.size() && vals[i].first == next) {
          n_left += 1;
          pos_left += vals[i].second;
          ++i;
        }
        prev = next;
      }
    }
    return best;
  }

  const LabeledSet<BowVector>& set_;
  const TrainConfig& cfg_;
  std::size_t max_features_;
  std::vector<std::int32_t> slot_;
  std::vector<std::int32_t> chosen_;
  std::vector<FeatureStats> stats_;
  std::vector<FeatureStats> pool_;
  std::vector<std::vector<std::pair<double, int>>> values_;
};

std::size_t resolve_max_features(const TrainConfig& cfg, std::size_t vocab_size) {
  if (cfg.max_features) return *cfg.max_features;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(vocab_size))));
}

void check_forest_input(const LabeledSet<BowVector>& train, std::size_t vocab_size, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error("cannot train on an empty set");
  for (const auto& x : train.samples) {
    for (const auto& e : x) {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= vocab_size) {
        throw Error("feature index outside vocabulary");
      }
    }
  }
}

}  // namespace

double DecisionTree::predict(const BowVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(feature_value(x, n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].leaf()) {
      stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
    }
  }
  return deepest;
}

double Forest::score(const BowVector& x) const {
  if (trees.empty()) throw Error("forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

Forest train_random_forest(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                           const TrainConfig& cfg) {
  check_forest_input(train, vocab_size, cfg);
  Forest forest;
  forest.max_features = resolve_max_features(cfg, vocab_size);
  forest.seed = cfg.seed;
  forest.trees.resize(cfg.n_trees);
  const auto n_trees = static_cast<std::ptrdiff_t>(cfg.n_trees);
#pragma omp parallel
  {
    TreeBuilder builder(train, vocab_size, cfg, forest.max_features);
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
      forest.trees[t] = builder.grow(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    }
  }
  return forest;
}

namespace serial {
Forest train_random_forest(const LabeledSet<BowVector>& train, std::size_t vocab_size,
                           const TrainConfig& cfg) {
  check_forest_input(train, vocab_size, cfg);
  Forest forest;
  forest.max_features = resolve_max_features(cfg, vocab_size);
  forest.seed = cfg.seed;
  TreeBuilder builder(train, vocab_size, cfg, forest.max_features);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) forest.trees.push_back(builder.grow(derive_seed(cfg.seed, t)));
  return forest;
}
}  // namespace serial

}  // namespace vaxnet::models
