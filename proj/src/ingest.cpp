#include "vaxnet/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaxnet/corpus.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/resources.hpp"
#include "vaxnet/rng.hpp"

namespace vaxnet::ingest {
namespace {

using nlohmann::json;

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_alnum_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

/// Validates one record; throws std::invalid_argument with the reason.
RawPost decode_post(const std::string& line) {
  const json j = json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  RawPost p;
  p.post_id = j.at("post_id").get<std::string>();
  p.author_id = j.at("author_id").get<std::string>();
  if (p.post_id.empty() || p.author_id.empty()) {
    throw std::invalid_argument("empty post_id or author_id");
  }
  p.author_handle = j.value("author_handle", std::string{});
  p.is_verified = j.value("is_verified", false);
  p.timestamp = j.at("timestamp").get<std::int64_t>();
  p.text = j.at("text").get<std::string>();
  p.is_retweet = j.at("is_retweet").get<bool>();
  if (const auto kind = optional_string(j, "kind")) {
    if (*kind != "original" && *kind != "retweet") {
      throw std::invalid_argument("unsupported record kind '" + *kind + "'");
    }
    if ((*kind == "retweet") != p.is_retweet) {
      throw std::invalid_argument("kind contradicts is_retweet");
    }
  }
  p.retweeted_post_id = optional_string(j, "retweeted_post_id");
  p.retweeted_author_id = optional_string(j, "retweeted_author_id");
  if (p.is_retweet) {
    if (!p.retweeted_post_id || !p.retweeted_author_id) {
      throw std::invalid_argument("retweet without retweeted_post_id/retweeted_author_id");
    }
  } else if (p.retweeted_post_id || p.retweeted_author_id) {
    throw std::invalid_argument("original post carries retweet linkage");
  }

  auto derived = corpus::extract_hashtags(p.text);
  if (const auto it = j.find("hashtags"); it != j.end() && !it->is_null()) {
    std::vector<std::string> given;
    for (const auto& h : *it) {
      auto tag = lowercase_ascii(h.get<std::string>());
      if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
      given.push_back(std::move(tag));
    }
    if (given != derived) throw std::invalid_argument("hashtags do not match the text");
  }
  p.hashtags = std::move(derived);
  return p;
}

struct Decoded {
  std::optional<RawPost> post;
  std::string error;
  bool blank = false;
};

}  // namespace

ParseResult parse_dataset(std::istream& in, bool strict, std::string provenance) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  std::vector<Decoded> decoded(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) {
      decoded[i].blank = true;
      continue;
    }
    try {
      decoded[i].post = decode_post(lines[i]);
    } catch (const std::exception& e) {
      decoded[i].error = e.what();
    }
  }

  ParseResult result;
  result.dataset.provenance = std::move(provenance);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    auto& d = decoded[i];
    if (d.blank) continue;
    if (!d.post) {
      if (strict) throw ParseError(i + 1, d.error);
      ++result.skipped;
      continue;
    }
    if (!seen.insert(d.post->post_id).second) {
      throw ParseError(i + 1, "duplicate post_id '" + d.post->post_id + "'");
    }
    result.dataset.posts.push_back(std::move(*d.post));
  }
  return result;
}

ParseResult read_dataset(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_dataset(in, strict, path);
}

std::string to_json_line(const RawPost& p) {
  nlohmann::ordered_json j;
  j["post_id"] = p.post_id;
  j["author_id"] = p.author_id;
  j["author_handle"] = p.author_handle;
  j["is_verified"] = p.is_verified;
  j["timestamp"] = p.timestamp;
  j["text"] = p.text;
  j["is_retweet"] = p.is_retweet;
  if (p.retweeted_post_id) j["retweeted_post_id"] = *p.retweeted_post_id;
  if (p.retweeted_author_id) j["retweeted_author_id"] = *p.retweeted_author_id;
  j["hashtags"] = p.hashtags;
  return j.dump();
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& post : dataset.posts) out << to_json_line(post) << '\n';
}

// ---------------------------------------------------------------------------

KeywordFilter::KeywordFilter(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {
  if (phrases_.empty()) throw Error("keyword list is empty");
  std::set<std::string> unique;
  for (auto& p : phrases_) {
    if (p.empty()) throw Error("empty keyword phrase");
    if (p != lowercase_ascii(p)) throw Error("keyword phrase not lowercase: '" + p + "'");
    if (!unique.insert(p).second) throw Error("duplicate keyword phrase: '" + p + "'");
  }
}

KeywordFilter KeywordFilter::bundled() { return KeywordFilter(resources::load_lines("keywords.txt")); }

KeywordFilter KeywordFilter::from_file(const std::string& path) {
  auto lines = resources::read_lines(path);
  for (auto& l : lines) l = lowercase_ascii(l);
  return KeywordFilter(std::move(lines));
}

bool KeywordFilter::matches(std::string_view text) const {
  const std::string lowered = lowercase_ascii(text);
  for (const auto& phrase : phrases_) {
    for (auto pos = lowered.find(phrase); pos != std::string::npos;
         pos = lowered.find(phrase, pos + 1)) {
      const bool left_ok = pos == 0 || !is_alnum_byte(lowered[pos - 1]) ||
                           !is_alnum_byte(phrase.front());
      const std::size_t end = pos + phrase.size();
      const bool right_ok = end == lowered.size() || !is_alnum_byte(lowered[end]) ||
                            !is_alnum_byte(phrase.back());
      if (left_ok && right_ok) return true;
    }
  }
  return false;
}

Dataset filter_by_keywords(const Dataset& dataset, const KeywordFilter& filter) {
  std::vector<char> keep(dataset.posts.size());
  const auto n = static_cast<std::ptrdiff_t>(dataset.posts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) keep[i] = filter.matches(dataset.posts[i].text);
  Dataset out{{}, dataset.provenance};
  for (std::size_t i = 0; i < dataset.posts.size(); ++i) {
    if (keep[i]) out.posts.push_back(dataset.posts[i]);
  }
  return out;
}

Dataset filter_retweet_only_users(const Dataset& dataset) {
  std::unordered_set<std::string> with_original;
  for (const auto& p : dataset.posts) {
    if (!p.is_retweet) with_original.insert(p.author_id);
  }
  Dataset out{{}, dataset.provenance};
  for (const auto& p : dataset.posts) {
    if (with_original.contains(p.author_id)) out.posts.push_back(p);
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> top_authors(const Dataset& dataset,
                                                             std::size_t n, RankBy by) {
  if (n == 0) throw Error("top_authors: n must be positive");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : dataset.posts) {
    counts.try_emplace(p.author_id, 0);
    if (by == RankBy::originals) {
      if (!p.is_retweet) ++counts[p.author_id];
    } else if (p.is_retweet && *p.retweeted_author_id != p.author_id) {
      ++counts[*p.retweeted_author_id];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kMarkerHashtags = {"mykidsmychoice", "vaccineroulette", "notest",
                                                  "praybig", "illuminati"};

std::vector<std::string> community_hashtags(int community) {
  if (community == 0) return kMarkerHashtags;
  std::vector<std::string> tags;
  for (int k = 0; k < 5; ++k) tags.push_back(fmt::format("c{}tag{}", community, k));
  return tags;
}

/// Zipf(1) sampler over `n` items.
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) cdf_[k] = (total += 1.0 / static_cast<double>(k + 1));
    for (auto& c : cdf_) c /= total;
  }
  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

constexpr std::int64_t kBaseTime = 1575158400;  // 2019-12-01T00:00:00Z

}  // namespace

std::vector<std::string> signature_terms(const SynthConfig& cfg, int community) {
  std::vector<std::string> terms;
  for (std::size_t k = 0; k < cfg.signature_terms; ++k) {
    terms.push_back(fmt::format("sig{}x{}", community, k));
  }
  return terms;
}

SyntheticData generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.n_users < 2 || cfg.n_communities < 2) {
    throw Error("synthetic config needs n_users >= 2 and n_communities >= 2");
  }
  if (cfg.posts_per_user < 1 || cfg.tokens_per_post < 1 || cfg.background_vocab < 1) {
    throw Error("synthetic config needs at least one post, token and background word");
  }
  for (double p : {cfg.vocab_shift, cfg.signature_rate, cfg.hashtag_rate, cfg.in_community}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("synthetic config probability outside [0, 1]");
  }
  if (cfg.vocab_shift + cfg.signature_rate > 1.0) {
    throw Error("vocab_shift + signature_rate exceeds 1");
  }
  if (cfg.retweet_density < 0.0) throw Error("retweet_density must be non-negative");
  if (cfg.ordering_signal && cfg.posts_per_user * cfg.tokens_per_post < 2) {
    throw Error("ordering signal needs room for two marker tokens");
  }
  if (cfg.signature_rate > 0.0 && cfg.signature_terms == 0) {
    throw Error("signature_rate > 0 needs signature_terms >= 1");
  }
  if (cfg.vocab_shift > 0.0 && cfg.topic_vocab == 0) {
    throw Error("vocab_shift > 0 needs topic_vocab >= 1");
  }

  const std::size_t n_comm = cfg.n_communities;
  const std::size_t width = std::to_string(cfg.n_users - 1).size();
  Rng rng(seed);
  ZipfSampler background(cfg.background_vocab);

  SyntheticData out;
  out.dataset.provenance = fmt::format("synthetic:seed={}", seed);
  std::vector<std::vector<std::size_t>> members(n_comm);
  std::vector<std::string> ids(cfg.n_users);
  std::vector<bool> verified(cfg.n_users);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    ids[i] = fmt::format("u{:0{}}", i, width);
    const int c = static_cast<int>(i % n_comm);
    members[c].push_back(i);
    out.planted[ids[i]] = c;
    verified[i] = rng.bernoulli(0.05);
  }

  // Ordering task: every body permutes one shared multiset of background
  // tokens, so all documents have the same bag of words and class marginals
  // match exactly. Only the marker order differs. Per-document draws would
  // leave sampling noise in the class marginals; exact class totals over
  // varying bodies would make a held-out body's tokens scarce in its own
  // class's training share, a signal BOW models pick up in reverse.
  std::vector<std::vector<std::string>> order_bodies;
  if (cfg.ordering_signal) {
    const std::size_t len = cfg.posts_per_user * cfg.tokens_per_post;
    Rng body_rng(derive_seed(seed, 1'000'003));
    std::vector<std::string> shared;
    for (std::size_t t = 0; t + 2 < len; ++t) shared.push_back(fmt::format("w{}", background(body_rng)));
    order_bodies.resize(cfg.n_users);
    for (std::size_t i = 0; i < cfg.n_users; ++i) {
      auto& body = order_bodies[i];
      body = shared;
      body_rng.shuffle(std::span<std::string>(body));
      std::size_t first = body_rng.index(len);
      std::size_t second = body_rng.index(len - 1);
      if (second >= first) ++second;
      if (first > second) std::swap(first, second);
      const bool positive = i % n_comm == 0;
      body.insert(body.begin() + static_cast<std::ptrdiff_t>(first), positive ? "alpha" : "omega");
      body.insert(body.begin() + static_cast<std::ptrdiff_t>(second), positive ? "omega" : "alpha");
    }
  }

  // originals[i][k] = index into dataset.posts
  std::vector<std::vector<std::size_t>> originals(cfg.n_users);
  std::int64_t clock = kBaseTime;
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    const int c = static_cast<int>(i % n_comm);
    std::vector<std::vector<std::string>> posts(cfg.posts_per_user);

    if (cfg.ordering_signal) {
      auto body = order_bodies[i];
      for (std::size_t k = 0; k < cfg.posts_per_user; ++k) {
        posts[k].push_back("vaccine");
        for (std::size_t t = 0; t < cfg.tokens_per_post; ++t) {
          posts[k].push_back(std::move(body[k * cfg.tokens_per_post + t]));
        }
      }
    } else {
      const auto tags = community_hashtags(c);
      for (std::size_t k = 0; k < cfg.posts_per_user; ++k) {
        auto& words = posts[k];
        words.push_back("vaccine");
        for (std::size_t t = 0; t < cfg.tokens_per_post; ++t) {
          const double r = rng.uniform();
          if (r < cfg.signature_rate) {
            words.push_back(fmt::format("sig{}x{}", c, rng.index(cfg.signature_terms)));
          } else if (r < cfg.signature_rate + cfg.vocab_shift) {
            words.push_back(fmt::format("c{}t{}", c, rng.index(cfg.topic_vocab)));
          } else {
            words.push_back(fmt::format("w{}", background(rng)));
          }
        }
        if (rng.bernoulli(cfg.hashtag_rate)) words.push_back("#" + tags[rng.index(tags.size())]);
      }
    }

    for (std::size_t k = 0; k < cfg.posts_per_user; ++k) {
      RawPost p;
      p.post_id = fmt::format("{}-o{}", ids[i], k);
      p.author_id = ids[i];
      p.author_handle = fmt::format("user{}", ids[i].substr(1));
      p.is_verified = verified[i];
      p.timestamp = clock++;
      p.text = join(posts[k]);
      p.hashtags = corpus::extract_hashtags(p.text);
      originals[i].push_back(out.dataset.posts.size());
      out.dataset.posts.push_back(std::move(p));
    }
  }

  const auto whole = static_cast<std::size_t>(std::floor(cfg.retweet_density));
  const double frac = cfg.retweet_density - static_cast<double>(whole);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    const std::size_t own = i % n_comm;
    const std::size_t count = whole + (rng.bernoulli(frac) ? 1 : 0);
    for (std::size_t r = 0; r < count; ++r) {
      std::size_t target_comm = own;
      if (!rng.bernoulli(cfg.in_community)) {
        target_comm = (own + 1 + rng.index(n_comm - 1)) % n_comm;
      }
      const auto& pool = members[target_comm];
      std::size_t target = pool[rng.index(pool.size())];
      if (target == i) {
        if (pool.size() == 1) continue;
        target = pool[(std::find(pool.begin(), pool.end(), i) - pool.begin() + 1) % pool.size()];
      }
      const auto& source = out.dataset.posts[originals[target][rng.index(cfg.posts_per_user)]];
      RawPost p;
      p.post_id = fmt::format("{}-r{}", ids[i], r);
      p.author_id = ids[i];
      p.author_handle = fmt::format("user{}", ids[i].substr(1));
      p.is_verified = verified[i];
      p.timestamp = clock++;
      p.text = source.text;
      p.is_retweet = true;
      p.retweeted_post_id = source.post_id;
      p.retweeted_author_id = source.author_id;
      p.hashtags = source.hashtags;
      out.dataset.posts.push_back(std::move(p));
    }
  }
  return out;
}

SynthConfig synth_config_from_json(std::string_view text) {
  SynthConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("synthetic config must be a JSON object");
  static const std::set<std::string> known = {
      "n_users",       "n_communities",   "posts_per_user", "tokens_per_post", "background_vocab",
      "topic_vocab",   "vocab_shift",     "signature_rate", "signature_terms", "hashtag_rate",
      "retweet_density", "in_community", "ordering_signal"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("synthetic config: unknown key '" + key + "'");
  }
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    get("n_users", cfg.n_users);
    get("n_communities", cfg.n_communities);
    get("posts_per_user", cfg.posts_per_user);
    get("tokens_per_post", cfg.tokens_per_post);
    get("background_vocab", cfg.background_vocab);
    get("topic_vocab", cfg.topic_vocab);
    get("vocab_shift", cfg.vocab_shift);
    get("signature_rate", cfg.signature_rate);
    get("signature_terms", cfg.signature_terms);
    get("hashtag_rate", cfg.hashtag_rate);
    get("retweet_density", cfg.retweet_density);
    get("in_community", cfg.in_community);
    get("ordering_signal", cfg.ordering_signal);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  return cfg;
}

MarginalCheck unigram_marginal_check(const Dataset& dataset, const std::map<std::string, int>& planted) {
  std::map<std::string, std::array<double, 2>> counts;
  std::array<double, 2> totals{0.0, 0.0};
  for (const auto& post : dataset.posts) {
    if (post.is_retweet) continue;
    const auto it = planted.find(post.author_id);
    if (it == planted.end()) continue;
    const std::size_t cls = it->second == 0 ? 0 : 1;
    for (const auto& token : corpus::tokenize(post.text)) {
      counts[token.surface][cls] += 1.0;
      totals[cls] += 1.0;
    }
  }
  if (totals[0] == 0.0 || totals[1] == 0.0) throw Error("both classes need tokens");
  const double n = totals[0] + totals[1];

  MarginalCheck out;
  // Pearson chi-square on the 2 x terms table; terms whose smaller expected
  // cell is below 5 are pooled into one bin.
  std::array<double, 2> pooled{0.0, 0.0};
  std::size_t bins = 0;
  const auto add_bin = [&](const std::array<double, 2>& obs) {
    const double row = obs[0] + obs[1];
    for (std::size_t c = 0; c < 2; ++c) {
      const double expected = row * totals[c] / n;
      out.chi_square += (obs[c] - expected) * (obs[c] - expected) / expected;
    }
    ++bins;
  };
  for (const auto& [term, obs] : counts) {
    out.l1 += std::abs(obs[0] / totals[0] - obs[1] / totals[1]);
    const double row = obs[0] + obs[1];
    if (row * std::min(totals[0], totals[1]) / n < 5.0) {
      pooled[0] += obs[0];
      pooled[1] += obs[1];
    } else {
      add_bin(obs);
    }
  }
  if (pooled[0] + pooled[1] > 0.0) add_bin(pooled);
  out.dof = bins > 1 ? bins - 1 : 0;
  if (out.dof == 0) return out;
  out.p_value = boost::math::gamma_q(static_cast<double>(out.dof) / 2.0, out.chi_square / 2.0);
  return out;
}

}  // namespace vaxnet::ingest
