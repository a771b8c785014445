#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vaxnet/corpus.hpp"

namespace vaxnet::termscatter {

struct TermCount {
  std::string term;
  std::uint64_t count_pos = 0;
  std::uint64_t count_neg = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

struct CountOptions {
  /// 1 for unigrams only, 2 to add bigrams.
  std::size_t ngram_max = 2;
  std::uint64_t min_count = 1;
  std::unordered_set<std::string> stopwords;
  /// When set, word unigrams outside it are dropped (hashtags and emoji
  /// aliases are exempt; bigrams are not filtered).
  std::optional<std::unordered_set<std::string>> dictionary;
};

/// Per-class unigram and bigram counts. Bigrams pair adjacent tokens within a
/// post and are dropped when either side is a stopword. `positive[i]` marks
/// docs[i] as Antivaxx. Sorted by term.
std::vector<TermCount> count_terms(std::span<const corpus::UserDocument> docs,
                                   std::span<const int> positive, const CountOptions& options);

namespace serial {
std::vector<TermCount> count_terms(std::span<const corpus::UserDocument> docs,
                                   std::span<const int> positive, const CountOptions& options);
}

struct TermStats {
  std::string term;
  std::uint64_t count_pos = 0;
  std::uint64_t count_neg = 0;
  /// Dense rank of count_pos scaled to [0, 1].
  double x = 0.0;
  /// Dense rank of count_neg scaled to [0, 1].
  double y = 0.0;
  /// Harmonic mean of x and 1 - y.
  double score = 0.0;
};

std::vector<TermStats> compute_coordinates(std::span<const TermCount> counts);

enum class Format { tsv, json, svg };
Format parse_format(std::string_view s);

std::string to_tsv(std::span<const TermStats> stats);
std::string to_json(std::span<const TermStats> stats);
/// Scatter plot with the top `labeled` terms by score annotated.
std::string to_svg(std::span<const TermStats> stats, std::size_t labeled = 20);

void export_scatter(std::span<const TermStats> stats, Format format,
                    const std::filesystem::path& path);

}  // namespace vaxnet::termscatter
