#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bridgeml {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// RFC 4180 field splitting for a single line. Quoted fields may contain separators.
std::vector<std::string> split_csv_line(std::string_view line);
// Quotes a field only when it contains a comma, quote or leading/trailing space.
std::string csv_escape(std::string_view field);

// Whole-string numeric parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips.
std::string format_double(double v);
// Six significant digits, for human-readable output.
std::string format_display(double v);

// Reads every line, stripping a trailing '\r'.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace bridgeml
