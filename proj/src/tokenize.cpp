#include <algorithm>
#include <charconv>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "vaxnet/corpus.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/resources.hpp"

namespace vaxnet::corpus {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8; each invalid byte becomes U+FFFD.
std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

bool is_ascii_alnum(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_handle_char(char32_t c) { return is_ascii_alnum(c) || c == '_'; }

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0x00A0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
}

char lower(char32_t c) {
  return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
}

/// Code points that begin an emoji presentation sequence.
bool is_emoji_start(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) ||
         (c >= 0x2300 && c <= 0x23FF) || (c >= 0x2B00 && c <= 0x2BFF) ||
         (c >= 0x2190 && c <= 0x21FF) || c == 0x3030 || c == 0x303D || c == 0x3297 ||
         c == 0x3299;
}

/// Code points that only modify a preceding emoji.
bool is_emoji_modifier(char32_t c) {
  return c == 0xFE0F || c == 0xFE0E || c == 0x20E3 || (c >= 0x1F3FB && c <= 0x1F3FF) ||
         (c >= 0xE0020 && c <= 0xE007F);
}

class EmojiTable {
 public:
  EmojiTable() {
    for (const auto& line : resources::load_lines("emoji_aliases.tsv")) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error("malformed emoji table line: " + line);
      std::u32string seq;
      std::string_view hex(line.data(), tab);
      while (!hex.empty()) {
        const auto sp = hex.find(' ');
        const auto part = hex.substr(0, sp);
        std::uint32_t cp = 0;
        std::from_chars(part.data(), part.data() + part.size(), cp, 16);
        seq.push_back(static_cast<char32_t>(cp));
        hex = sp == std::string_view::npos ? std::string_view{} : hex.substr(sp + 1);
      }
      max_len_ = std::max(max_len_, seq.size());
      starts_.insert(seq.front());
      aliases_.emplace(std::move(seq), line.substr(tab + 1));
    }
  }

  static const EmojiTable& instance() {
    static const EmojiTable table;
    return table;
  }

  /// Longest table entry starting at `text[pos]`: (alias, length).
  std::pair<const std::string*, std::size_t> longest_match(std::u32string_view text,
                                                           std::size_t pos) const {
    if (!starts_.contains(text[pos])) return {nullptr, 0};
    const std::size_t limit = std::min(max_len_, text.size() - pos);
    for (std::size_t len = limit; len >= 1; --len) {
      const auto it = aliases_.find(std::u32string(text.substr(pos, len)));
      if (it != aliases_.end()) return {&it->second, len};
    }
    return {nullptr, 0};
  }

  const std::string* exact(std::u32string_view seq) const {
    const auto it = aliases_.find(std::u32string(seq));
    return it == aliases_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::u32string, std::string> aliases_;
  std::unordered_set<char32_t> starts_;
  std::size_t max_len_ = 0;
};

const std::string kGenericEmoji = ":emoji:";

bool starts_with_ci(std::u32string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (static_cast<char32_t>(lower(text[pos + k])) != static_cast<char32_t>(prefix[k])) {
      return false;
    }
  }
  return true;
}

/// Length of an unlisted emoji sequence beginning at `pos`: the base code point,
/// its modifiers, and any zero-width-joined continuation.
std::size_t unlisted_emoji_length(std::u32string_view text, std::size_t pos) {
  std::size_t end = pos + 1;
  while (end < text.size()) {
    if (is_emoji_modifier(text[end])) {
      ++end;
    } else if (text[end] == 0x200D && end + 1 < text.size() && is_emoji_start(text[end + 1])) {
      end += 2;
    } else {
      break;
    }
  }
  return end - pos;
}

}  // namespace

bool well_formed(TokenKind kind, std::string_view s) {
  const auto word_char = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
  switch (kind) {
    case TokenKind::word:
      return !s.empty() && std::all_of(s.begin(), s.end(), word_char);
    case TokenKind::hashtag:
      return s.size() >= 2 && s[0] == '#' &&
             std::all_of(s.begin() + 1, s.end(), [&](char c) { return word_char(c) || c == '_'; });
    case TokenKind::emoji_alias:
      return s.size() >= 3 && s.front() == ':' && s.back() == ':' &&
             std::all_of(s.begin() + 1, s.end() - 1,
                         [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; });
  }
  return false;
}

std::optional<Token> classify(std::string_view surface) {
  for (auto kind : {TokenKind::word, TokenKind::hashtag, TokenKind::emoji_alias}) {
    if (well_formed(kind, surface)) return Token{kind, std::string(surface)};
  }
  return std::nullopt;
}

std::optional<Token> map_emoji(std::u32string_view codepoints) {
  if (codepoints.empty()) return std::nullopt;
  if (const auto* alias = EmojiTable::instance().exact(codepoints)) {
    return Token{TokenKind::emoji_alias, *alias};
  }
  if (is_emoji_start(codepoints.front())) return Token{TokenKind::emoji_alias, kGenericEmoji};
  return std::nullopt;
}

std::vector<Token> tokenize(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  const std::u32string_view view(cps);
  const auto& table = EmojiTable::instance();
  std::vector<Token> tokens;

  std::size_t i = 0;
  while (i < view.size()) {
    const char32_t c = view[i];

    if ((c == 'h' || c == 'H') &&
        (starts_with_ci(view, i, "http://") || starts_with_ci(view, i, "https://"))) {
      while (i < view.size() && !is_space(view[i])) ++i;
      continue;
    }
    if (c == '@' && i + 1 < view.size() && is_handle_char(view[i + 1])) {
      ++i;
      while (i < view.size() && is_handle_char(view[i])) ++i;
      continue;
    }

    // Emoji lookup precedes word scanning so keycaps like "1️⃣" map whole.
    if (const auto [alias, len] = table.longest_match(view, i);
        alias != nullptr && (c >= 0x80 || len >= 2)) {
      tokens.push_back({TokenKind::emoji_alias, *alias});
      i += len;
      continue;
    }

    if (c == '#' && i + 1 < view.size() && is_handle_char(view[i + 1])) {
      std::string tag = "#";
      ++i;
      while (i < view.size() && is_handle_char(view[i])) tag.push_back(lower(view[i++]));
      tokens.push_back({TokenKind::hashtag, std::move(tag)});
      continue;
    }
    if (is_ascii_alnum(c)) {
      std::string word;
      while (i < view.size() && is_ascii_alnum(view[i])) word.push_back(lower(view[i++]));
      tokens.push_back({TokenKind::word, std::move(word)});
      continue;
    }
    if (is_emoji_start(c)) {
      tokens.push_back({TokenKind::emoji_alias, kGenericEmoji});
      i += unlisted_emoji_length(view, i);
      continue;
    }
    ++i;
  }
  return tokens;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  for (auto& token : tokenize(text)) {
    if (token.kind == TokenKind::hashtag) tags.push_back(token.surface.substr(1));
  }
  return tags;
}

}  // namespace vaxnet::corpus
