#pragma once

// Line-oriented helpers for the text model format. Every record is `key v1 v2 ...`
// on one line; doubles use the shortest round-trip representation.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bridgeml::serial {

void write_double(std::ostream& out, std::string_view key, double v);
void write_vector(std::ostream& out, std::string_view key, const std::vector<double>& v);
void write_indices(std::ostream& out, std::string_view key, const std::vector<std::size_t>& v);

// Reads the next line, checks its key, and returns the remaining tokens.
std::vector<std::string> read_record(std::istream& in, std::string_view key);
double read_double(std::istream& in, std::string_view key);
long long read_int(std::istream& in, std::string_view key);
std::vector<double> read_vector(std::istream& in, std::string_view key);
std::vector<std::size_t> read_indices(std::istream& in, std::string_view key);

}  // namespace bridgeml::serial
