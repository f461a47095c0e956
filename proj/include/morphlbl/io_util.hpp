#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphlbl {

// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view text, char delim);

std::string_view trim(std::string_view text);

// Parses `key = value` lines. Blank lines and lines starting with '#' are
// skipped; keys may repeat and order is preserved.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

// Fixed-precision form used in report files.
std::string format_fixed(double value, int digits = 6);

// Prints `warning: <message>` to stderr.
void warn(std::string_view message);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace morphlbl
