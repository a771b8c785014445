#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vaxnet::ingest {

/// One original post or retweet. Quote tweets are not representable.
struct RawPost {
  std::string post_id;
  std::string author_id;
  std::string author_handle;
  bool is_verified = false;
  std::int64_t timestamp = 0;
  std::string text;
  bool is_retweet = false;
  std::optional<std::string> retweeted_post_id;
  std::optional<std::string> retweeted_author_id;
  /// Lowercase, without the leading '#'.
  std::vector<std::string> hashtags;

  friend bool operator==(const RawPost&, const RawPost&) = default;
};

struct Dataset {
  std::vector<RawPost> posts;
  std::string provenance;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.posts == b.posts; }
};

struct ParseResult {
  Dataset dataset;
  std::size_t skipped = 0;
};

/// Reads line-delimited JSON posts. Strict mode throws ParseError on the first
/// malformed line; lenient mode skips and counts it. Duplicate post ids are
/// always an error. A missing `hashtags` field is derived from the text; a
/// present one must match it.
ParseResult parse_dataset(std::istream& in, bool strict, std::string provenance = {});
ParseResult read_dataset(const std::string& path, bool strict);

std::string to_json_line(const RawPost& post);
void write_dataset(std::ostream& out, const Dataset& dataset);

/// Case-insensitive phrase matcher; a match may not sit inside a longer
/// alphanumeric run.
class KeywordFilter {
 public:
  explicit KeywordFilter(std::vector<std::string> phrases);

  /// The bundled vaccination keyword list.
  static KeywordFilter bundled();
  static KeywordFilter from_file(const std::string& path);

  bool matches(std::string_view text) const;
  const std::vector<std::string>& phrases() const noexcept { return phrases_; }

 private:
  std::vector<std::string> phrases_;
};

Dataset filter_by_keywords(const Dataset& dataset, const KeywordFilter& filter);

/// Drops every post of authors that never posted an original.
Dataset filter_retweet_only_users(const Dataset& dataset);

enum class RankBy { originals, times_retweeted };

/// Most active authors, descending by count, ties by ascending author_id.
/// times_retweeted counts retweets by other users (self-retweets excluded).
std::vector<std::pair<std::string, std::size_t>> top_authors(const Dataset& dataset,
                                                             std::size_t n, RankBy by);

struct SynthConfig {
  std::size_t n_users = 200;
  std::size_t n_communities = 2;
  std::size_t posts_per_user = 3;
  std::size_t tokens_per_post = 8;
  std::size_t background_vocab = 300;
  std::size_t topic_vocab = 30;
  /// Probability a token comes from the author's community topic vocabulary.
  double vocab_shift = 0.3;
  /// Probability a token is one of the community's few signature terms.
  double signature_rate = 0.05;
  std::size_t signature_terms = 5;
  /// Probability an original carries a community hashtag.
  double hashtag_rate = 0.5;
  /// Mean retweets issued per user.
  double retweet_density = 6.0;
  /// Probability a retweet targets the retweeter's own community.
  double in_community = 0.9;
  /// Positive community 0 marked only by "alpha" preceding "omega".
  bool ordering_signal = false;
};

struct SyntheticData {
  Dataset dataset;
  /// Generating community of every author.
  std::map<std::string, int> planted;
};

/// Deterministic for a fixed seed. Community 0 plays the Antivaxx role: its
/// hashtags are the marker hashtags and its signature terms are `sig0x<k>`.
SyntheticData generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

SynthConfig synth_config_from_json(std::string_view json);

/// Signature terms planted for `community`.
std::vector<std::string> signature_terms(const SynthConfig& cfg, int community);

/// Compares the unigram distributions of community 0 authors and all other
/// authors over tokens of original posts.
struct MarginalCheck {
  /// L1 distance between the normalized distributions, in [0, 2].
  double l1 = 0.0;
  /// Pearson homogeneity statistic and its degrees of freedom.
  double chi_square = 0.0;
  std::size_t dof = 0;
  /// Upper-tail probability of the statistic under equal distributions.
  double p_value = 1.0;
};

MarginalCheck unigram_marginal_check(const Dataset& dataset, const std::map<std::string, int>& planted);

}  // namespace vaxnet::ingest
