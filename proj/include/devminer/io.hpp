#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace devminer::io {

/// Whole-file read; throws IngestError when the file cannot be opened.
std::string read_text(const std::filesystem::path& file);

/// Writes through a temporary sibling and renames, creating parent directories.
void write_text(const std::filesystem::path& file, std::string_view content);

}  // namespace devminer::io
