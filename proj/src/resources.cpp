#include "vaxnet/resources.hpp"

#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>
#include <utility>

#include "vaxnet/error.hpp"

namespace vaxnet::detail {
std::span<const std::pair<std::string_view, std::string_view>> embedded_files();
}

namespace vaxnet::resources {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = trim(content.substr(pos, end - pos));
    if (!line.empty()) lines.emplace_back(line);
    pos = end + 1;
  }
  return lines;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::filesystem::path data_dir() {
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return VAXNET_DEFAULT_DATA_DIR;
}

std::string load(std::string_view name) {
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
    const auto path = std::filesystem::path(env) / std::string(name);
    if (std::filesystem::exists(path)) return slurp(path);
  }
  for (const auto& [file, content] : detail::embedded_files()) {
    if (file == name) return std::string(content);
  }
  const auto path = data_dir() / std::string(name);
  if (std::filesystem::exists(path)) return slurp(path);
  throw IoError("unknown data file: " + std::string(name));
}

std::vector<std::string> load_lines(std::string_view name) { return split_lines(load(name)); }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  return split_lines(slurp(path));
}

}  // namespace vaxnet::resources
