#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace abrlab {

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits. Stable across platforms.
std::string fnv1a_hex(std::string_view data);

}  // namespace abrlab
