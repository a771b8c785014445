#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vaxnet/community.hpp"
#include "vaxnet/corpus.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/rng.hpp"

namespace vaxnet::features {

/// Token -> index map. Index 0 is padding and 1 the unknown bucket; real
/// tokens are dense from 2.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnknown = 1;

  Vocabulary() = default;
  /// `tokens[k]` receives index k + 2.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::int32_t index_of(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size() + 2; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// SHA-256 of the TSV serialization.
  std::string hash() const;

  void write_tsv(std::ostream& out) const;
  static Vocabulary read_tsv(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Tokens found in at least `min_df` documents, by descending total frequency
/// (ties lexicographic), at most `max_size` of them.
Vocabulary build_vocabulary(std::span<const corpus::UserDocument> docs, std::size_t min_df,
                            std::size_t max_size);

struct BowEntry {
  std::int32_t index = 0;
  std::uint32_t count = 0;

  friend bool operator==(const BowEntry&, const BowEntry&) = default;
};

/// Sparse counts sorted by index.
using BowVector = std::vector<BowEntry>;

struct SequenceSample {
  std::vector<std::int32_t> ids;

  /// Number of leading non-padding ids.
  std::size_t length() const noexcept;

  friend bool operator==(const SequenceSample&, const SequenceSample&) = default;
};

enum class Representation { bow, sequence };

std::string_view name(Representation r);
Representation parse_representation(std::string_view s);

/// Raw counts; out-of-vocabulary tokens accumulate under index 1.
BowVector vectorize_bow(const corpus::UserDocument& doc, const Vocabulary& vocab);

/// First `max_len` token ids (unknown -> 1), padded with 0 at the end.
SequenceSample encode_sequence(const corpus::UserDocument& doc, const Vocabulary& vocab,
                               std::size_t max_len);

/// Order-preserving batch vectorization (OpenMP over documents).
std::vector<BowVector> vectorize_all(std::span<const corpus::UserDocument> docs,
                                     const Vocabulary& vocab);
std::vector<SequenceSample> encode_all(std::span<const corpus::UserDocument> docs,
                                       const Vocabulary& vocab, std::size_t max_len);

namespace serial {
std::vector<BowVector> vectorize_all(std::span<const corpus::UserDocument> docs,
                                     const Vocabulary& vocab);
}

/// Parallel arrays of samples, binary labels (1 = Antivaxx) and author ids.
template <class Sample>
struct LabeledSet {
  std::vector<Sample> samples;
  std::vector<int> labels;
  std::vector<std::string> authors;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  void push_back(Sample s, int label, std::string author) {
    samples.push_back(std::move(s));
    labels.push_back(label);
    authors.push_back(std::move(author));
  }

  /// Elements at `indices`, in that order.
  LabeledSet subset(std::span<const std::size_t> indices) const {
    LabeledSet out;
    for (const auto i : indices) out.push_back(samples.at(i), labels.at(i), authors.at(i));
    return out;
  }

  template <class F>
  auto map(F&& f) const -> LabeledSet<std::invoke_result_t<F, const Sample&>> {
    LabeledSet<std::invoke_result_t<F, const Sample&>> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(f(samples[i]), labels[i], authors[i]);
    return out;
  }
};

/// Every Antivaxx-labeled document plus an equal-size uniform sample of the
/// others, shuffled. Documents of unlabeled authors are ignored.
LabeledSet<corpus::UserDocument> balanced_sample(std::span<const corpus::UserDocument> docs,
                                                 const community::BinaryLabels& labels,
                                                 std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: each class contributes floor(fraction * n_class) training
/// samples, clamped to [1, n_class - 1]. Both halves are shuffled.
SplitIndices stratified_split(std::span<const int> labels, double train_fraction,
                              std::uint64_t seed);

template <class Sample>
std::pair<LabeledSet<Sample>, LabeledSet<Sample>> train_test_split(const LabeledSet<Sample>& set,
                                                                   double train_fraction,
                                                                   std::uint64_t seed) {
  const auto split = stratified_split(set.labels, train_fraction, seed);
  return {set.subset(split.train), set.subset(split.test)};
}

}  // namespace vaxnet::features
