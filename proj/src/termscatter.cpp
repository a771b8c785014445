#include "vaxnet/termscatter.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <omp.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaxnet/error.hpp"
#include "vaxnet/io.hpp"

namespace vaxnet::termscatter {
namespace {

using Tally = std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>>;

void tally_document(const corpus::UserDocument& doc, bool positive, const CountOptions& opt,
                    Tally& tally) {
  const auto bump = [&](const std::string& term) {
    auto& c = tally[term];
    (positive ? c.first : c.second) += 1;
  };
  for (std::size_t p = 0; p < doc.n_posts(); ++p) {
    const auto post = doc.post(p);
    for (std::size_t i = 0; i < post.size(); ++i) {
      const auto& t = post[i];
      const bool stop = opt.stopwords.contains(t.surface);
      const bool known = !opt.dictionary || t.kind != corpus::TokenKind::word ||
                         opt.dictionary->contains(t.surface);
      if (!stop && known) bump(t.surface);
      if (opt.ngram_max >= 2 && i + 1 < post.size() && !stop &&
          !opt.stopwords.contains(post[i + 1].surface)) {
        bump(t.surface + " " + post[i + 1].surface);
      }
    }
  }
}

void check_inputs(std::span<const corpus::UserDocument> docs, std::span<const int> positive,
                  const CountOptions& options) {
  if (docs.empty()) throw Error("count_terms: empty corpus");
  if (docs.size() != positive.size()) throw Error("count_terms: labels do not match documents");
  if (options.min_count < 1) throw Error("count_terms: min_count must be at least 1");
  if (options.ngram_max < 1 || options.ngram_max > 2) throw Error("count_terms: ngram_max must be 1 or 2");
}

std::vector<TermCount> finish(std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& merged,
                              std::uint64_t min_count) {
  std::vector<TermCount> out;
  for (auto& [term, c] : merged) {
    if (c.first + c.second >= min_count) out.push_back({term, c.first, c.second});
  }
  return out;
}

/// Dense rank of each value scaled to [0, 1]. A single distinct value maps to
/// 1 if positive and 0 otherwise.
std::vector<double> dense_rank(const std::vector<std::uint64_t>& values) {
  std::vector<std::uint64_t> distinct(values);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (distinct.size() == 1) {
      out[i] = values[i] > 0 ? 1.0 : 0.0;
      continue;
    }
    const auto r = std::lower_bound(distinct.begin(), distinct.end(), values[i]) - distinct.begin();
    out[i] = static_cast<double>(r) / static_cast<double>(distinct.size() - 1);
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<TermCount> count_terms(std::span<const corpus::UserDocument> docs,
                                   std::span<const int> positive, const CountOptions& options) {
  check_inputs(docs, positive, options);
  const int threads = omp_get_max_threads();
  std::vector<Tally> partial(threads);
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel num_threads(threads)
  {
    auto& local = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) tally_document(docs[i], positive[i] != 0, options, local);
  }
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged;
  for (auto& local : partial) {
    for (auto& [term, c] : local) {
      auto& m = merged[term];
      m.first += c.first;
      m.second += c.second;
    }
  }
  return finish(merged, options.min_count);
}

namespace serial {
std::vector<TermCount> count_terms(std::span<const corpus::UserDocument> docs,
                                   std::span<const int> positive, const CountOptions& options) {
  check_inputs(docs, positive, options);
  Tally tally;
  for (std::size_t i = 0; i < docs.size(); ++i) tally_document(docs[i], positive[i] != 0, options, tally);
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged(tally.begin(), tally.end());
  return finish(merged, options.min_count);
}
}  // namespace serial

std::vector<TermStats> compute_coordinates(std::span<const TermCount> counts) {
  std::vector<std::uint64_t> pos, neg;
  for (const auto& c : counts) {
    pos.push_back(c.count_pos);
    neg.push_back(c.count_neg);
  }
  const auto x = dense_rank(pos);
  const auto y = dense_rank(neg);
  std::vector<TermStats> out;
  out.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double a = x[i], b = 1.0 - y[i];
    const double score = a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
    out.push_back({counts[i].term, counts[i].count_pos, counts[i].count_neg, x[i], y[i], score});
  }
  return out;
}

Format parse_format(std::string_view s) {
  if (s == "tsv") return Format::tsv;
  if (s == "json") return Format::json;
  if (s == "svg") return Format::svg;
  throw Error("unknown scatter format '" + std::string(s) + "'");
}

std::string to_tsv(std::span<const TermStats> stats) {
  std::string out = "term\tcount_pos\tcount_neg\tx\ty\tscore\n";
  for (const auto& s : stats) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", s.term, s.count_pos, s.count_neg, s.x, s.y, s.score);
  }
  return out;
}

std::string to_json(std::span<const TermStats> stats) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : stats) {
    arr.push_back({{"term", s.term}, {"count_pos", s.count_pos}, {"count_neg", s.count_neg},
                   {"x", s.x}, {"y", s.y}, {"score", s.score}});
  }
  return arr.dump(1) + "\n";
}

std::string to_svg(std::span<const TermStats> stats, std::size_t labeled) {
  constexpr double kSize = 800.0, kMargin = 60.0, kPlot = kSize - 2 * kMargin;
  const auto px = [&](double x) { return kMargin + x * kPlot; };
  const auto py = [&](double y) { return kMargin + (1.0 - y) * kPlot; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{0:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {0:.0f}\" font-family=\"sans-serif\">\n",
      kSize);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{0:.0f}\" fill=\"white\"/>\n", kSize);
  out += fmt::format(
      "<rect x=\"{0:.1f}\" y=\"{0:.1f}\" width=\"{1:.1f}\" height=\"{1:.1f}\" fill=\"none\" "
      "stroke=\"#888\"/>\n",
      kMargin, kPlot);
  out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ccc\"/>\n",
                     px(0.0), py(0.0), px(1.0), py(1.0));
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"14\">"
                     "Antivaxx frequency rank</text>\n",
                     kSize / 2, kSize - 15);
  out += fmt::format("<text x=\"20\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"14\" "
                     "transform=\"rotate(-90 20 {:.1f})\">Other frequency rank</text>\n",
                     kSize / 2, kSize / 2);

  for (const auto& s : stats) {
    const int red = static_cast<int>(std::lround(255.0 * s.score));
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"rgb({},0,{})\" "
                       "fill-opacity=\"0.6\"><title>{}</title></circle>\n",
                       px(s.x), py(s.y), red, 255 - red, xml_escape(s.term));
  }

  std::vector<const TermStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->score != b->score ? a->score > b->score : a->term < b->term;
  });
  if (order.size() > labeled) order.resize(labeled);
  for (const auto* s : order) {
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\">{}</text>\n",
                       px(s->x) + 5, py(s->y) - 4, xml_escape(s->term));
  }
  out += "</svg>\n";
  return out;
}

void export_scatter(std::span<const TermStats> stats, Format format,
                    const std::filesystem::path& path) {
  switch (format) {
    case Format::tsv: io::write_file(path, to_tsv(stats)); break;
    case Format::json: io::write_file(path, to_json(stats)); break;
    case Format::svg: io::write_file(path, to_svg(stats)); break;
  }
}

}  // namespace vaxnet::termscatter
