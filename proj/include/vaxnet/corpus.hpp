#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vaxnet::ingest {
struct Dataset;
}

namespace vaxnet::corpus {

enum class TokenKind { word, hashtag, emoji_alias };

/// A normalized token. Hashtags keep their leading '#', emoji aliases their
/// surrounding colons, so the surface string alone determines the kind.
struct Token {
  TokenKind kind = TokenKind::word;
  std::string surface;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Rebuilds a token from its surface string; nullopt if it fits no kind's syntax.
std::optional<Token> classify(std::string_view surface);

/// True if `surface` satisfies the syntax of `kind`
/// (word `[a-z0-9]+`, hashtag `#[a-z0-9_]+`, emoji alias `:[a-z_]+:`).
bool well_formed(TokenKind kind, std::string_view surface);

/// Alias of a complete emoji code point sequence: the bundled table entry,
/// `:emoji:` for unlisted emoji, nullopt for anything that is not an emoji.
std::optional<Token> map_emoji(std::u32string_view codepoints);

/// Lowercases, drops URLs and @mentions, keeps #hashtags, maps emoji to
/// aliases and splits the remainder on non-alphanumeric runs. Total on any
/// byte string: invalid UTF-8 acts as a separator.
std::vector<Token> tokenize(std::string_view text);

/// Hashtags of `text` in order of appearance, lowercased, without '#'.
std::vector<std::string> extract_hashtags(std::string_view text);

/// One author's original posts concatenated in timestamp order.
struct UserDocument {
  std::string author_id;
  std::vector<Token> tokens;
  /// Offset into `tokens` where each post begins; size equals n_posts.
  std::vector<std::size_t> post_starts;

  std::size_t n_posts() const noexcept { return post_starts.size(); }

  /// Tokens of post `i`.
  std::span<const Token> post(std::size_t i) const;

  friend bool operator==(const UserDocument&, const UserDocument&) = default;
};

/// One document per author with at least one original post, ordered by author_id.
std::vector<UserDocument> build_documents(const ingest::Dataset& dataset);

namespace serial {
std::vector<UserDocument> build_documents(const ingest::Dataset& dataset);
}

/// Corpus file: one JSON object per line, `{"author_id", "tokens", "post_starts"}`.
void write_corpus(std::ostream& out, std::span<const UserDocument> docs);
std::vector<UserDocument> read_corpus(std::istream& in);

}  // namespace vaxnet::corpus
