#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sledge {

// Reads a whole file; throws FormatError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a half-written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace sledge
