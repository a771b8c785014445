#include "vaxnet/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "vaxnet/io.hpp"

namespace vaxnet::features {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t k = 0; k < tokens_.size(); ++k) {
    if (!index_.emplace(tokens_[k], static_cast<std::int32_t>(k + 2)).second) {
      throw Error("duplicate vocabulary token '" + tokens_[k] + "'");
    }
  }
}

std::int32_t Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::string Vocabulary::hash() const {
  std::ostringstream ss;
  write_tsv(ss);
  return io::sha256_hex(ss.str());
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (std::size_t k = 0; k < tokens_.size(); ++k) out << tokens_[k] << '\t' << k + 2 << '\n';
}

Vocabulary Vocabulary::read_tsv(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::size_t index = 0;
    if (tab == std::string::npos ||
        std::from_chars(line.data() + tab + 1, line.data() + line.size(), index).ec != std::errc{}) {
      throw ParseError(line_no, "expected token<TAB>index");
    }
    if (index != tokens.size() + 2) throw ParseError(line_no, "vocabulary indices must be dense from 2");
    tokens.push_back(line.substr(0, tab));
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocabulary(std::span<const corpus::UserDocument> docs, std::size_t min_df,
                            std::size_t max_size) {
  if (min_df < 1) throw Error("build_vocabulary: min_df must be at least 1");
  if (docs.empty()) throw Error("build_vocabulary: empty corpus");
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // (df, tf)
  std::unordered_set<std::string_view> in_doc;
  for (const auto& doc : docs) {
    in_doc.clear();
    for (const auto& t : doc.tokens) {
      auto& s = stats[t.surface];
      ++s.second;
      if (in_doc.insert(t.surface).second) ++s.first;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, s] : stats) {
    if (s.first >= min_df) ranked.emplace_back(token, s.second);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [token, _] : ranked) tokens.push_back(std::move(token));
  return Vocabulary(std::move(tokens));
}

std::size_t SequenceSample::length() const noexcept {
  const auto it = std::find(ids.begin(), ids.end(), Vocabulary::kPad);
  return static_cast<std::size_t>(it - ids.begin());
}

std::string_view name(Representation r) { return r == Representation::bow ? "bow" : "seq"; }

Representation parse_representation(std::string_view s) {
  if (s == "bow") return Representation::bow;
  if (s == "seq" || s == "sequence") return Representation::sequence;
  throw Error("unknown representation '" + std::string(s) + "'");
}

BowVector vectorize_bow(const corpus::UserDocument& doc, const Vocabulary& vocab) {
  std::map<std::int32_t, std::uint32_t> counts;
  for (const auto& t : doc.tokens) ++counts[vocab.index_of(t.surface)];
  BowVector v;
  v.reserve(counts.size());
  for (const auto& [index, count] : counts) v.push_back({index, count});
  return v;
}

SequenceSample encode_sequence(const corpus::UserDocument& doc, const Vocabulary& vocab,
                               std::size_t max_len) {
  if (max_len < 1) throw Error("encode_sequence: length must be at least 1");
  SequenceSample s;
  s.ids.assign(max_len, Vocabulary::kPad);
  const std::size_t n = std::min(max_len, doc.tokens.size());
  for (std::size_t i = 0; i < n; ++i) s.ids[i] = vocab.index_of(doc.tokens[i].surface);
  return s;
}

std::vector<BowVector> vectorize_all(std::span<const corpus::UserDocument> docs,
                                     const Vocabulary& vocab) {
  std::vector<BowVector> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = vectorize_bow(docs[i], vocab);
  return out;
}

std::vector<SequenceSample> encode_all(std::span<const corpus::UserDocument> docs,
                                       const Vocabulary& vocab, std::size_t max_len) {
  std::vector<SequenceSample> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = encode_sequence(docs[i], vocab, max_len);
  return out;
}

namespace serial {
std::vector<BowVector> vectorize_all(std::span<const corpus::UserDocument> docs,
                                     const Vocabulary& vocab) {
  std::vector<BowVector> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(vectorize_bow(doc, vocab));
  return out;
}
}  // namespace serial

LabeledSet<corpus::UserDocument> balanced_sample(std::span<const corpus::UserDocument> docs,
                                                 const community::BinaryLabels& labels,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto it = labels.find(docs[i].author_id);
    if (it == labels.end()) continue;
    (it->second == community::Label::antivaxx ? positives : negatives).push_back(i);
  }
  if (negatives.size() < positives.size()) {
    throw Error("balanced_sample: " + std::to_string(negatives.size()) + " negatives for " +
                std::to_string(positives.size()) + " positives");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(negatives));
  negatives.resize(positives.size());

  std::vector<std::pair<std::size_t, int>> chosen;
  for (const auto i : positives) chosen.emplace_back(i, 1);
  for (const auto i : negatives) chosen.emplace_back(i, 0);
  rng.shuffle(std::span<std::pair<std::size_t, int>>(chosen));

  LabeledSet<corpus::UserDocument> out;
  for (const auto& [i, label] : chosen) out.push_back(docs[i], label, docs[i].author_id);
  return out;
}

SplitIndices stratified_split(std::span<const int> labels, double train_fraction,
                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train_test_split: fraction must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  SplitIndices split;
  for (auto& [label, members] : by_class) {
    const std::size_t n = members.size();
    if (n < 2) throw Error("train_test_split: class " + std::to_string(label) + " has fewer than 2 samples");
    // The epsilon absorbs representation error such as 0.8 * 25 = 19.999...
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    rng.shuffle(std::span<std::size_t>(members));
    split.train.insert(split.train.end(), members.begin(), members.begin() + n_train);
    split.test.insert(split.test.end(), members.begin() + n_train, members.end());
  }
  rng.shuffle(std::span<std::size_t>(split.train));
  rng.shuffle(std::span<std::size_t>(split.test));
  return split;
}

}  // namespace vaxnet::features
