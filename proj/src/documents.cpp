#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "vaxnet/corpus.hpp"
#include "vaxnet/error.hpp"
#include "vaxnet/ingest.hpp"

namespace vaxnet::corpus {
namespace {

using PostList = std::vector<const ingest::RawPost*>;

/// Original posts grouped by author (ordered by author_id), each group
/// sorted by timestamp then post_id.
std::vector<std::pair<std::string, PostList>> group_originals(const ingest::Dataset& dataset) {
  std::map<std::string, PostList> by_author;
  for (const auto& post : dataset.posts) {
    if (!post.is_retweet) by_author[post.author_id].push_back(&post);
  }
  std::vector<std::pair<std::string, PostList>> groups(by_author.begin(), by_author.end());
  for (auto& [author, posts] : groups) {
    std::sort(posts.begin(), posts.end(), [](const auto* a, const auto* b) {
      return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->post_id < b->post_id;
    });
  }
  return groups;
}

UserDocument assemble(const std::string& author, const PostList& posts) {
  UserDocument doc;
  doc.author_id = author;
  for (const auto* post : posts) {
    doc.post_starts.push_back(doc.tokens.size());
    auto tokens = tokenize(post->text);
    doc.tokens.insert(doc.tokens.end(), std::make_move_iterator(tokens.begin()),
                      std::make_move_iterator(tokens.end()));
  }
  return doc;
}

}  // namespace

std::span<const Token> UserDocument::post(std::size_t i) const {
  const std::size_t begin = post_starts.at(i);
  const std::size_t end = i + 1 < post_starts.size() ? post_starts[i + 1] : tokens.size();
  return std::span<const Token>(tokens).subspan(begin, end - begin);
}

std::vector<UserDocument> build_documents(const ingest::Dataset& dataset) {
  const auto groups = group_originals(dataset);
  std::vector<UserDocument> docs(groups.size());
  const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    docs[i] = assemble(groups[i].first, groups[i].second);
  }
  return docs;
}

namespace serial {
std::vector<UserDocument> build_documents(const ingest::Dataset& dataset) {
  std::vector<UserDocument> docs;
  for (const auto& [author, posts] : group_originals(dataset)) docs.push_back(assemble(author, posts));
  return docs;
}
}  // namespace serial

void write_corpus(std::ostream& out, std::span<const UserDocument> docs) {
  for (const auto& doc : docs) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& t : doc.tokens) tokens.push_back(t.surface);
    nlohmann::json line = {
        {"author_id", doc.author_id}, {"tokens", tokens}, {"post_starts", doc.post_starts}};
    out << line.dump() << '\n';
  }
}

std::vector<UserDocument> read_corpus(std::istream& in) {
  std::vector<UserDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      UserDocument doc;
      doc.author_id = j.at("author_id").get<std::string>();
      for (const auto& s : j.at("tokens")) {
        auto token = classify(s.get<std::string>());
        if (!token) throw ParseError(line_no, "invalid token '" + s.get<std::string>() + "'");
        doc.tokens.push_back(std::move(*token));
      }
      doc.post_starts = j.value("post_starts", std::vector<std::size_t>{0});
      if (doc.post_starts.empty() || doc.post_starts.front() != 0 ||
          !std::is_sorted(doc.post_starts.begin(), doc.post_starts.end()) ||
          doc.post_starts.back() > doc.tokens.size()) {
        throw ParseError(line_no, "invalid post_starts");
      }
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return docs;
}

}  // namespace vaxnet::corpus
