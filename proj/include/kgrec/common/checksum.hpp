#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kgrec {

/// Lowercase hex SHA-256 of a file's bytes. Throws DataError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace kgrec
