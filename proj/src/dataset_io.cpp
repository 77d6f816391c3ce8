#include "bridgeml/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

namespace {

Role parse_role(std::string_view s, std::size_t line) {
  if (s == "feature") return Role::feature;
  if (s == "class") return Role::target;
  if (s == "meta") return Role::meta;
  throw DataError("schema line " + std::to_string(line) + ": unknown role '" + std::string(s) + "'");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Schema parse_schema(std::string_view text) {
  std::vector<Attribute> attrs;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, ',');
    auto where = "schema line " + std::to_string(lineno);
    if (f.size() < 3 || f.size() > 4) throw DataError(where + ": expected name,kind[,values],role");
    Attribute a;
    a.name = std::string(trim(f[0]));
    auto kind = trim(f[1]);
    a.role = parse_role(trim(f.back()), lineno);
    if (kind == "nominal") {
      a.kind = AttrKind::nominal;
      if (f.size() != 4) throw DataError(where + ": nominal attribute needs a value list");
      for (auto& v : split(f[2], '|')) a.values.emplace_back(trim(v));
    } else if (kind == "numeric") {
      a.kind = AttrKind::numeric;
      if (f.size() != 3) throw DataError(where + ": numeric attribute takes no value list");
    } else {
      throw DataError(where + ": unknown kind '" + std::string(kind) + "'");
    }
    attrs.push_back(std::move(a));
  }
  return Schema(std::move(attrs));
}

std::string format_schema(const Schema& s) {
  std::string out;
  for (const auto& a : s.attributes()) {
    out += a.name;
    out += ',';
    out += to_string(a.kind);
    if (a.is_nominal()) {
      out += ',';
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (i) out += '|';
        out += a.values[i];
      }
    }
    out += ',';
    out += to_string(a.role);
    out += '\n';
  }
  return out;
}

Schema read_schema(const std::filesystem::path& path) { return parse_schema(slurp(path)); }

Dataset parse_csv(std::string_view text, const Schema& schema) {
  auto lines = split(text, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("CSV has no header row");

  auto header = split_csv_line(lines[0]);
  if (header.size() != schema.size()) throw DataError("CSV header does not match schema width");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != schema[i].name)
      throw DataError("CSV column " + std::to_string(i + 1) + " is '" + header[i] + "', schema expects '" +
                      schema[i].name + "'");

  std::vector<Instance> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    auto cells = split_csv_line(lines[ln]);
    auto where = "CSV line " + std::to_string(ln + 1);
    if (cells.size() != schema.size()) throw DataError(where + ": wrong number of fields");
    Instance x;
    x.values.resize(schema.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& a = schema[i];
      if (cells[i] == "?") {
        x.values[i] = kMissing;
      } else if (a.is_nominal()) {
        auto v = a.index_of(cells[i]);
        if (!v) throw DataError(where + ": '" + cells[i] + "' is not a value of '" + a.name + "'");
        x.values[i] = static_cast<double>(*v);
      } else {
        auto v = parse_double(cells[i]);
        if (!v) throw DataError(where + ": '" + cells[i] + "' is not a number");
        x.values[i] = *v;
      }
    }
    rows.push_back(std::move(x));
  }
  return Dataset(schema, std::move(rows));
}

std::string format_csv(const Dataset& d) {
  const auto& s = d.schema();
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(s[i].name);
  }
  out += '\n';
  for (const auto& x : d.instances()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ',';
      const double v = x.values[i];
      if (is_missing(v)) out += '?';
      else if (s[i].is_nominal()) out += csv_escape(s[i].values[static_cast<std::size_t>(v)]);
      else out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

Dataset read_csv(const std::filesystem::path& path, const Schema& schema) {
  return parse_csv(slurp(path), schema);
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  auto schema = read_schema(dir / kDatasetSchema);
  return read_csv(dir / kDatasetCsv, schema);
}

void save_dataset_dir(const Dataset& d, const std::filesystem::path& dir) {
  write_file_atomic(dir / kDatasetSchema, format_schema(d.schema()));
  write_file_atomic(dir / kDatasetCsv, format_csv(d));
}

}  // namespace bridgeml
