#include "bridgeml/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

std::size_t LayoutSchema::record_length() const {
  std::size_t n = 0;
  for (const auto& f : fields) n = std::max(n, f.end);
  return n;
}

const LayoutField* LayoutSchema::find(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

void LayoutSchema::validate() const {
  if (fields.empty()) throw ConfigError("layout has no fields");
  std::unordered_set<std::string> names;
  for (const auto& f : fields) {
    if (f.name.empty()) throw ConfigError("layout field without a name");
    if (!names.insert(f.name).second) throw ConfigError("duplicate layout field " + f.name);
    if (f.start < 1 || f.start > f.end) throw ConfigError("bad span for layout field " + f.name);
    if (!(f.scale > 0) || !std::isfinite(f.scale)) throw ConfigError("bad scale for layout field " + f.name);
  }
  std::vector<const LayoutField*> sorted;
  for (const auto& f : fields) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->start <= sorted[i - 1]->end)
      throw ConfigError("layout fields " + sorted[i - 1]->name + " and " + sorted[i]->name + " overlap");
}

LayoutSchema parse_layout(std::string_view text) {
  LayoutSchema l;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto parts = split(line, ',');
    if (parts.size() != 4 && parts.size() != 5)
      throw ConfigError("layout line " + std::to_string(lineno) + ": expected name,start,end,type[,scale]");
    LayoutField f;
    f.name = std::string(trim(parts[0]));
    auto s = parse_int(trim(parts[1]));
    auto e = parse_int(trim(parts[2]));
    if (!s || !e || *s < 1 || *e < 1) throw ConfigError("layout line " + std::to_string(lineno) + ": bad column");
    f.start = static_cast<std::size_t>(*s);
    f.end = static_cast<std::size_t>(*e);
    auto type = trim(parts[3]);
    if (type == "integer") f.type = FieldType::integer;
    else if (type == "real") f.type = FieldType::real;
    else if (type == "code") f.type = FieldType::code;
    else throw ConfigError("layout line " + std::to_string(lineno) + ": unknown type " + std::string(type));
    if (parts.size() == 5) {
      auto sc = parse_double(trim(parts[4]));
      if (!sc) throw ConfigError("layout line " + std::to_string(lineno) + ": bad scale");
      f.scale = *sc;
    }
    l.fields.push_back(std::move(f));
  }
  l.validate();
  return l;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool all_digits(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

LayoutSchema read_layout(const std::filesystem::path& path) { return parse_layout(slurp(path)); }

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::malformed_field: return "malformed-field";
    case RejectReason::pre_1971: return "pre-1971";
    case RejectReason::excluded_region: return "excluded-region";
    case RejectReason::duplicate: return "duplicate";
  }
  return "?";
}

std::size_t RejectReport::count(RejectReason r) const {
  return static_cast<std::size_t>(std::count_if(rejects.begin(), rejects.end(), [r](const Reject& x) { return x.reason == r; }));
}

std::string format_reject_report(const RejectReport& r) {
  std::string out = "line,reason,detail,raw\n";
  for (const auto& x : r.rejects) {
    out += std::to_string(x.line) + "," + std::string(to_string(x.reason)) + "," + csv_escape(x.detail) + "," +
           csv_escape(x.raw) + "\n";
  }
  return out;
}

std::optional<double> derive_average_span(double total_length, double spans) {
  if (is_missing(total_length) || is_missing(spans) || !(spans >= 1) || !(total_length > 0)) return std::nullopt;
  return total_length / spans;
}

IngestResult parse_nbi_text(std::string_view text, const LayoutSchema& layout, const Schema& target,
                            const NbiOptions& opts) {
  layout.validate();
  const bool derive_span = target.find(opts.avg_span_name).has_value() && !layout.find(opts.avg_span_name);
  for (const auto& a : target.attributes()) {
    if (derive_span && a.name == opts.avg_span_name) {
      if (!a.is_numeric()) throw ConfigError(a.name + " must be numeric");
      if (!layout.find(opts.length_field) || !layout.find(opts.spans_field))
        throw ConfigError("deriving " + a.name + " needs layout fields " + opts.length_field + " and " +
                          opts.spans_field);
      continue;
    }
    const auto* f = layout.find(a.name);
    if (!f) throw ConfigError("schema attribute " + a.name + " is not in the layout");
    if (a.is_numeric() && f->type == FieldType::code)
      throw ConfigError("code field " + a.name + " must be declared nominal");
  }
  if (opts.post_1971 && !layout.find(opts.year_field))
    throw ConfigError("post-1971 filter needs layout field " + opts.year_field);

  const std::size_t reclen = layout.record_length();
  const LayoutField* state_f = layout.find(opts.state_field);
  const LayoutField* key_f = opts.key_field.empty() ? nullptr : layout.find(opts.key_field);
  if (!opts.key_field.empty() && !key_f) throw ConfigError("key field " + opts.key_field + " is not in the layout");

  IngestResult out;
  std::vector<Instance> rows;
  std::unordered_set<std::string> keys;
  std::size_t span_warnings = 0;

  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++out.lines;
    auto reject = [&](RejectReason r, std::string detail) {
      out.rejects.rejects.push_back({ln + 1, line, r, std::move(detail)});
    };
    if (line.size() < reclen) {
      reject(RejectReason::malformed_field, "record shorter than " + std::to_string(reclen) + " columns");
      continue;
    }
    // Parse every layout field: numeric value (scaled) or trimmed text.
    std::map<std::string, double, std::less<>> num;
    std::map<std::string, std::string, std::less<>> txt;
    std::string bad;
    for (const auto& f : layout.fields) {
      auto span = trim(std::string_view(line).substr(f.start - 1, f.end - f.start + 1));
      txt[f.name] = std::string(span);
      if (f.type == FieldType::code) continue;
      if (span.empty()) {
        num[f.name] = kMissing;
        continue;
      }
      std::optional<double> v;
      if (f.type == FieldType::integer) {
        if (all_digits(span))
          if (auto i = parse_int(span)) v = static_cast<double>(*i);
      } else {
        v = parse_double(span);
      }
      if (!v) {
        bad = f.name + "='" + std::string(span) + "'";
        break;
      }
      num[f.name] = *v * f.scale;
    }
    if (!bad.empty()) {
      reject(RejectReason::malformed_field, bad);
      continue;
    }
    if (state_f && opts.excluded_states.count(txt.at(state_f->name))) {
      reject(RejectReason::excluded_region, txt.at(state_f->name));
      continue;
    }

    Instance inst;
    inst.values.assign(target.size(), kMissing);
    for (std::size_t a = 0; a < target.size() && bad.empty(); ++a) {
      const auto& attr = target[a];
      if (derive_span && attr.name == opts.avg_span_name) continue;
      if (attr.is_numeric()) {
        inst.values[a] = num.at(attr.name);
        continue;
      }
      const auto& label = txt.at(attr.name);
      if (label.empty()) continue;
      auto idx = attr.index_of(label);
      if (!idx) bad = attr.name + "='" + label + "' not a known code";
      else inst.values[a] = static_cast<double>(*idx);
    }
    if (!bad.empty()) {
      reject(RejectReason::malformed_field, bad);
      continue;
    }
    if (opts.post_1971) {
      const double year = num.count(opts.year_field) ? num.at(opts.year_field) : kMissing;
      if (is_missing(year)) {
        reject(RejectReason::malformed_field, opts.year_field + " missing");
        continue;
      }
      if (year < opts.first_year) {
        reject(RejectReason::pre_1971, std::to_string(static_cast<long long>(year)));
        continue;
      }
    }
    if (key_f && !keys.insert(txt.at(key_f->name)).second) {
      reject(RejectReason::duplicate, txt.at(key_f->name));
      continue;
    }
    if (derive_span) {
      auto avg = derive_average_span(num.at(opts.length_field), num.at(opts.spans_field));
      if (avg) inst.values[*target.find(opts.avg_span_name)] = *avg;
      else ++span_warnings;
    }
    rows.push_back(std::move(inst));
  }
  if (span_warnings) {
    out.warnings.push_back(std::to_string(span_warnings) + " records without a usable span count; " +
                           opts.avg_span_name + " set to MISSING");
    spdlog::warn("{}", out.warnings.back());
  }
  out.data = Dataset(target, std::move(rows));
  return out;
}

IngestResult parse_nbi(const std::filesystem::path& path, const LayoutSchema& layout, const Schema& target,
                       const NbiOptions& opts) {
  return parse_nbi_text(slurp(path), layout, target, opts);
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * kRad, dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * 6371.0 * std::asin(std::min(1.0, std::sqrt(a)));
}

SeismicGrid::SeismicGrid(double resolution) : res_(resolution) {
  if (!(resolution > 0) || !std::isfinite(resolution)) throw ConfigError("grid resolution must be positive");
}

long long SeismicGrid::snap(double coord) const {
  return static_cast<long long>(std::floor(coord / res_ + 0.5 + 1e-9));
}

void SeismicGrid::set(double lat, double lon, double pga) {
  if (!(pga >= 0) || !std::isfinite(pga)) throw DataError("peak ground acceleration must be >= 0");
  cells_[{snap(lat), snap(lon)}] = pga;
}

std::optional<double> SeismicGrid::lookup(double lat, double lon) const {
  if (is_missing(lat) || is_missing(lon)) return std::nullopt;
  auto it = cells_.find({snap(lat), snap(lon)});
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

SeismicGrid SeismicGrid::parse(std::string_view text, double resolution) {
  SeismicGrid g(resolution);
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss{std::string(line)};
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) throw DataError("grid line " + std::to_string(lineno) + ": expected lon lat pga");
    auto lon = parse_double(a), lat = parse_double(b), pga = parse_double(c);
    if (!lon || !lat || !pga) throw DataError("grid line " + std::to_string(lineno) + ": bad number");
    g.set(*lat, *lon, *pga);
  }
  return g;
}

SeismicGrid SeismicGrid::read(const std::filesystem::path& path, double resolution) {
  return parse(slurp(path), resolution);
}

FusionResult attach_seismic(const Dataset& d, const SeismicGrid& g, std::string_view lat_attr,
                            std::string_view lon_attr) {
  if (g.empty()) throw ConfigError("seismic grid is empty");
  if (d.schema().find(kSeismicAttr)) throw ConfigError("dataset already has " + std::string(kSeismicAttr));
  const auto la = d.schema().index(lat_attr), lo = d.schema().index(lon_attr);
  std::vector<double> col(d.size(), kMissing);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto v = g.lookup(d[i].values[la], d[i].values[lo]);
    if (v) col[i] = *v;
    else ++outside;
  }
  FusionResult r{append_attribute(d, Attribute::numeric(std::string(kSeismicAttr)), col), {}};
  if (outside) {
    r.warnings.push_back(std::to_string(outside) + " instances outside the seismic grid (excluded-region); " +
                         std::string(kSeismicAttr) + " set to MISSING");
    spdlog::warn("{}", r.warnings.back());
  }
  return r;
}

void CostTable::add(const CostCity& city, int year, CostEntry e) {
  if (!(e.steel > 0) || !(e.concrete > 0)) throw DataError("costs must be positive for " + city.name);
  std::size_t idx = cities_.size();
  for (std::size_t i = 0; i < cities_.size(); ++i)
    if (cities_[i].name == city.name) idx = i;
  if (idx == cities_.size()) cities_.push_back(city);
  entries_[{idx, year}] = e;
}

CostTable CostTable::parse(std::string_view text) {
  CostTable t;
  bool header = true;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 6) throw DataError("cost line " + std::to_string(lineno) + ": expected 6 fields");
    auto lat = parse_double(f[1]), lon = parse_double(f[2]), steel = parse_double(f[4]), conc = parse_double(f[5]);
    auto year = parse_int(f[3]);
    if (!lat || !lon || !year || !steel || !conc) throw DataError("cost line " + std::to_string(lineno) + ": bad number");
    t.add({std::string(trim(f[0])), *lat, *lon}, static_cast<int>(*year), {*steel, *conc});
  }
  return t;
}

CostTable CostTable::read(const std::filesystem::path& path) { return parse(slurp(path)); }

std::size_t CostTable::nearest_city(double lat, double lon) const {
  if (cities_.empty()) throw ConfigError("cost table is empty");
  std::size_t best = 0;
  double best_km = haversine_km(lat, lon, cities_[0].lat, cities_[0].lon);
  for (std::size_t i = 1; i < cities_.size(); ++i) {
    const double km = haversine_km(lat, lon, cities_[i].lat, cities_[i].lon);
    if (km < best_km) {
      best_km = km;
      best = i;
    }
  }
  return best;
}

std::pair<std::pair<std::size_t, int>, CostEntry> CostTable::resolve(double lat, double lon, int year) const {
  const auto city = nearest_city(lat, lon);
  if (auto it = entries_.find({city, year}); it != entries_.end()) return *it;
  std::vector<double> km(cities_.size());
  for (std::size_t i = 0; i < cities_.size(); ++i) km[i] = haversine_km(lat, lon, cities_[i].lat, cities_[i].lon);
  const std::pair<const std::pair<std::size_t, int>, CostEntry>* best = nullptr;
  double best_pen = 0;
  for (const auto& e : entries_) {
    const double pen = km[e.first.first] + 50.0 * std::abs(e.first.second - year);
    if (!best || pen < best_pen) {
      best = &e;
      best_pen = pen;
    }
  }
  return *best;
}

std::map<int, double> parse_deflator(std::string_view text) {
  std::map<int, double> m;
  bool header = true;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 2) throw DataError("deflator rows are year,multiplier");
    auto y = parse_int(f[0]);
    auto k = parse_double(f[1]);
    if (!y || !k || !(*k > 0)) throw DataError("bad deflator row: " + std::string(line));
    m[static_cast<int>(*y)] = *k;
  }
  return m;
}

std::map<int, double> read_deflator(const std::filesystem::path& path) { return parse_deflator(slurp(path)); }

FusionResult attach_costs(const Dataset& d, const CostTable& c, const CostOptions& opts) {
  if (c.empty()) throw ConfigError("cost table is empty");
  const auto la = d.schema().index(opts.lat_attr), lo = d.schema().index(opts.lon_attr);
  const auto yr = d.schema().index(opts.year_attr);
  std::vector<double> steel(d.size(), kMissing), conc(d.size(), kMissing), ratio(d.size(), kMissing);
  std::size_t unknown = 0, undeflated = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& v = d[i].values;
    if (is_missing(v[la]) || is_missing(v[lo]) || is_missing(v[yr])) {
      ++unknown;
      continue;
    }
    auto [key, e] = c.resolve(v[la], v[lo], static_cast<int>(std::lround(v[yr])));
    double k = 1.0;
    if (!opts.deflator.empty()) {
      auto it = opts.deflator.find(key.second);
      if (it != opts.deflator.end()) k = it->second;
      else ++undeflated;
    }
    steel[i] = e.steel * k;
    conc[i] = e.concrete * k;
    ratio[i] = e.steel / e.concrete;
  }
  auto out = append_attribute(d, Attribute::numeric("steel_cost"), steel);
  out = append_attribute(out, Attribute::numeric("concrete_cost"), conc);
  out = append_attribute(out, Attribute::numeric("steel_concrete_ratio"), ratio);
  FusionResult r{std::move(out), {}};
  if (unknown) r.warnings.push_back(std::to_string(unknown) + " instances without location or year; costs MISSING");
  if (undeflated) r.warnings.push_back(std::to_string(undeflated) + " cost lookups had no deflator entry; left undeflated");
  for (const auto& w : r.warnings) spdlog::warn("{}", w);
  return r;
}

}  // namespace bridgeml
