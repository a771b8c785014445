#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vaxnet::resources {

/// Environment variable that redirects bundled data lookups to a directory.
inline constexpr const char* kDataDirEnv = "VAXNET_DATA_DIR";

/// Contents of a bundled data file (keywords.txt, stopwords.txt,
/// emoji_aliases.tsv, defaults.json). A file of the same name under
/// $VAXNET_DATA_DIR takes precedence over the copy compiled into the binary.
std::string load(std::string_view name);

/// Directory holding the on-disk data files (english_words.txt lives only here).
std::filesystem::path data_dir();

/// Non-empty lines of a bundled text file, trimmed. There is no comment
/// syntax: keyword files legitimately start lines with '#'.
std::vector<std::string> load_lines(std::string_view name);

/// Non-empty trimmed lines of an arbitrary text file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace vaxnet::resources
