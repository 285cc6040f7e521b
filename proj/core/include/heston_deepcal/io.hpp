#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hdc::io {

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a partially written file. Throws Error(IoError).
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Comma-separated fields with surrounding whitespace trimmed. No quoting.
std::vector<std::string> split_csv_line(std::string_view line);

// Strict numeric parse of a whole field; returns false on trailing garbage.
bool parse_double(std::string_view text, double& out);

}  // namespace hdc::io
