#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vaxnet::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace vaxnet::io
