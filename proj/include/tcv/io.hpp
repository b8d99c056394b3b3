#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tcv::io {

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace tcv::io
