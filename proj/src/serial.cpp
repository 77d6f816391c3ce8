#include "bridgeml/serial.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml::serial {

void write_double(std::ostream& out, std::string_view key, double v) {
  out << key << ' ' << format_double(v) << '\n';
}

void write_vector(std::ostream& out, std::string_view key, const std::vector<double>& v) {
  out << key << ' ' << v.size();
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

void write_indices(std::ostream& out, std::string_view key, const std::vector<std::size_t>& v) {
  out << key << ' ' << v.size();
  for (auto x : v) out << ' ' << x;
  out << '\n';
}

std::vector<std::string> read_record(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model: unexpected end of file, expected '" + std::string(key) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key) throw DataError("model: expected '" + std::string(key) + "', found '" + k + "'");
  std::vector<std::string> tokens;
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

namespace {

double to_double(const std::string& s) {
  auto v = parse_double(s);
  if (!v) throw DataError("model: bad number '" + s + "'");
  return *v;
}

long long to_int(const std::string& s) {
  auto v = parse_int(s);
  if (!v) throw DataError("model: bad integer '" + s + "'");
  return *v;
}

std::vector<std::string> counted(std::istream& in, std::string_view key) {
  auto t = read_record(in, key);
  if (t.empty()) throw DataError("model: '" + std::string(key) + "' lacks a count");
  auto n = to_int(t[0]);
  if (n < 0 || static_cast<std::size_t>(n) != t.size() - 1)
    throw DataError("model: '" + std::string(key) + "' count does not match");
  t.erase(t.begin());
  return t;
}

}  // namespace

double read_double(std::istream& in, std::string_view key) {
  auto t = read_record(in, key);
  if (t.size() != 1) throw DataError("model: '" + std::string(key) + "' expects one value");
  return to_double(t[0]);
}

long long read_int(std::istream& in, std::string_view key) {
  auto t = read_record(in, key);
  if (t.size() != 1) throw DataError("model: '" + std::string(key) + "' expects one value");
  return to_int(t[0]);
}

std::vector<double> read_vector(std::istream& in, std::string_view key) {
  std::vector<double> out;
  for (const auto& s : counted(in, key)) out.push_back(to_double(s));
  return out;
}

std::vector<std::size_t> read_indices(std::istream& in, std::string_view key) {
  std::vector<std::size_t> out;
  for (const auto& s : counted(in, key)) {
    auto v = to_int(s);
    if (v < 0) throw DataError("model: negative index");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace bridgeml::serial
