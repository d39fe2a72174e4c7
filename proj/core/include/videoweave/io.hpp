#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace videoweave {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace videoweave
