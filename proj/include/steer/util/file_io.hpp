#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace steer::util {

/// Reads a whole file; transparently inflates gzip content. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`, so readers
/// never observe a partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Appends to `path`, creating it when absent.
void append_file(const std::filesystem::path& path, std::string_view content);

std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);
bool is_gzip(std::string_view data);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace steer::util
