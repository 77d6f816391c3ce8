#include "bridgeml/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>

#include "bridgeml/errors.hpp"

namespace bridgeml {

std::string_view to_string(AttrKind kind) {
  return kind == AttrKind::nominal ? "nominal" : "numeric";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::feature: return "feature";
    case Role::target: return "class";
    case Role::meta: return "meta";
  }
  return "feature";
}

Attribute Attribute::nominal(std::string name, std::vector<std::string> values, Role role) {
  return Attribute{std::move(name), AttrKind::nominal, std::move(values), role};
}

Attribute Attribute::numeric(std::string name, Role role) {
  return Attribute{std::move(name), AttrKind::numeric, {}, role};
}

std::optional<std::size_t> Attribute::index_of(std::string_view label) const {
  auto it = std::find(values.begin(), values.end(), label);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

Schema::Schema(std::vector<Attribute> attributes) : attrs_(std::move(attributes)) {
  std::set<std::string_view> names;
  std::optional<std::size_t> cls;
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    const auto& a = attrs_[i];
    if (a.name.empty()) throw DataError("attribute with empty name");
    if (!names.insert(a.name).second) throw DataError("duplicate attribute '" + a.name + "'");
    if (a.is_nominal()) {
      if (a.values.empty()) throw DataError("nominal attribute '" + a.name + "' has no values");
      std::set<std::string_view> labels(a.values.begin(), a.values.end());
      if (labels.size() != a.values.size())
        throw DataError("nominal attribute '" + a.name + "' repeats a value");
    } else if (!a.values.empty()) {
      throw DataError("numeric attribute '" + a.name + "' lists values");
    }
    if (a.role == Role::target) {
      if (cls) throw DataError("more than one class attribute");
      cls = i;
    }
  }
  if (!cls) throw DataError("schema has no class attribute");
  if (!attrs_[*cls].is_nominal()) throw DataError("class attribute must be nominal");
  class_index_ = *cls;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attrs_.size(); ++i)
    if (attrs_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::index(std::string_view name) const {
  auto i = find(name);
  if (!i) throw UnknownAttribute(std::string(name));
  return *i;
}

std::vector<std::size_t> Schema::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < attrs_.size(); ++i)
    if (attrs_[i].role == Role::feature) out.push_back(i);
  return out;
}

std::vector<std::string> Schema::feature_names() const {
  std::vector<std::string> out;
  for (auto i : feature_indices()) out.push_back(attrs_[i].name);
  return out;
}

std::string Schema::fingerprint() const {
  // FNV-1a 64 over a canonical rendering.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
  };
  for (const auto& a : attrs_) {
    mix(a.name);
    mix(to_string(a.kind));
    for (const auto& v : a.values) mix(v);
    mix(to_string(a.role));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool Instance::operator==(const Instance& o) const {
  if (weight != o.weight || values.size() != o.values.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    bool ma = is_missing(values[i]), mb = is_missing(o.values[i]);
    if (ma != mb || (!ma && values[i] != o.values[i])) return false;
  }
  return true;
}

Dataset::Dataset(Schema schema, std::vector<Instance> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
  const auto n = schema_.size();
  for (std::size_t r = 0; r < instances_.size(); ++r) {
    const auto& x = instances_[r];
    if (x.values.size() != n)
      throw DataError("instance " + std::to_string(r) + " has " + std::to_string(x.values.size()) +
                      " slots, schema has " + std::to_string(n));
    if (!(x.weight >= 0.0) || std::isinf(x.weight))
      throw DataError("instance " + std::to_string(r) + " has invalid weight");
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x.values[i];
      if (is_missing(v)) continue;
      const auto& a = schema_[i];
      if (a.is_nominal()) {
        if (v < 0 || v >= static_cast<double>(a.arity()) || v != std::floor(v))
          throw DataError("instance " + std::to_string(r) + ": category index out of range for '" +
                          a.name + "'");
      } else if (std::isinf(v)) {
        throw DataError("instance " + std::to_string(r) + ": infinite value for '" + a.name + "'");
      }
    }
  }
}

std::optional<std::size_t> Dataset::class_of(std::size_t i) const {
  double v = instances_[i].values[schema_.class_index()];
  if (is_missing(v)) return std::nullopt;
  return static_cast<std::size_t>(v);
}

std::vector<double> Dataset::class_counts() const {
  std::vector<double> counts(schema_.num_classes(), 0.0);
  for (std::size_t i = 0; i < instances_.size(); ++i)
    if (auto c = class_of(i)) counts[*c] += instances_[i].weight;
  return counts;
}

double Dataset::total_weight() const {
  double w = 0.0;
  for (const auto& x : instances_) w += x.weight;
  return w;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Instance> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(instances_.at(r));
  Dataset d;
  d.schema_ = schema_;
  d.instances_ = std::move(out);
  return d;
}

Dataset Dataset::with_instances(std::vector<Instance> instances) const {
  return Dataset(schema_, std::move(instances));
}

FrequencyTable dataset_stats(const Dataset& d, std::string_view attr) {
  const auto idx = d.schema().index(attr);
  const auto& a = d.schema()[idx];
  if (!a.is_nominal()) throw ConfigError("attribute '" + a.name + "' is numeric");

  std::vector<std::size_t> counts(a.arity(), 0);
  std::size_t missing = 0;
  for (const auto& x : d.instances()) {
    double v = x.values[idx];
    if (is_missing(v)) ++missing;
    else ++counts[static_cast<std::size_t>(v)];
  }
  FrequencyTable t;
  t.attribute = a.name;
  t.total = d.size();
  if (t.total == 0) return t;
  auto pct = [&](std::size_t c) { return 100.0 * static_cast<double>(c) / static_cast<double>(t.total); };
  for (std::size_t v = 0; v < counts.size(); ++v)
    if (counts[v] > 0) t.rows.push_back({a.values[v], counts[v], pct(counts[v])});
  if (missing > 0) t.rows.push_back({"?", missing, pct(missing)});
  return t;
}

namespace {

Schema replace_attribute(const Schema& s, std::size_t idx, Attribute a) {
  auto attrs = s.attributes();
  attrs[idx] = std::move(a);
  return Schema(std::move(attrs));
}

}  // namespace

Partition partition_by(const Dataset& d, std::string_view attr) {
  const auto idx = d.schema().index(attr);
  const auto& a = d.schema()[idx];
  if (!a.is_nominal()) throw ConfigError("cannot partition by numeric attribute '" + a.name + "'");
  if (idx == d.schema().class_index()) throw ConfigError("cannot partition by the class attribute");

  auto key = a;
  key.role = Role::meta;
  Schema schema = replace_attribute(d.schema(), idx, key);

  std::vector<std::vector<Instance>> buckets(a.arity());
  Partition out;
  for (const auto& x : d.instances()) {
    double v = x.values[idx];
    if (is_missing(v)) ++out.rejected;
    else buckets[static_cast<std::size_t>(v)].push_back(x);
  }
  for (std::size_t v = 0; v < buckets.size(); ++v)
    if (!buckets[v].empty()) out.parts.emplace(a.values[v], Dataset(schema, std::move(buckets[v])));
  return out;
}

Dataset project(const Dataset& d, std::span<const std::string> keep) {
  const auto& s = d.schema();
  std::vector<bool> kept(s.size(), false);
  for (const auto& name : keep) kept[s.index(name)] = true;
  kept[s.class_index()] = true;

  std::vector<std::size_t> cols;
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (kept[i]) {
      cols.push_back(i);
      attrs.push_back(s[i]);
    }
  std::vector<Instance> rows;
  rows.reserve(d.size());
  for (const auto& x : d.instances()) {
    Instance y;
    y.weight = x.weight;
    y.values.reserve(cols.size());
    for (auto c : cols) y.values.push_back(x.values[c]);
    rows.push_back(std::move(y));
  }
  return Dataset(Schema(std::move(attrs)), std::move(rows));
}

Dataset restrict_features(const Dataset& d, std::span<const std::string> features) {
  const auto& s = d.schema();
  std::vector<bool> wanted(s.size(), false);
  for (const auto& name : features) {
    auto i = s.index(name);
    if (i == s.class_index()) throw ConfigError("class attribute cannot be listed as a feature");
    wanted[i] = true;
  }
  auto attrs = s.attributes();
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i == s.class_index()) continue;
    attrs[i].role = wanted[i] ? Role::feature : Role::meta;
  }
  return Dataset(Schema(std::move(attrs)), d.instances());
}

Dataset with_role(const Dataset& d, std::string_view attr, Role role) {
  const auto idx = d.schema().index(attr);
  auto a = d.schema()[idx];
  a.role = role;
  return Dataset(replace_attribute(d.schema(), idx, std::move(a)), d.instances());
}

Dataset append_attribute(const Dataset& d, Attribute attr, std::span<const double> values) {
  if (values.size() != d.size()) throw DataError("column length does not match dataset size");
  auto attrs = d.schema().attributes();
  attrs.push_back(std::move(attr));
  std::vector<Instance> rows = d.instances();
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].values.push_back(values[i]);
  return Dataset(Schema(std::move(attrs)), std::move(rows));
}

Dataset drop_missing_class(const Dataset& d) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.class_of(i)) keep.push_back(i);
  if (keep.size() == d.size()) return d;
  return d.subset(keep);
}

}  // namespace bridgeml
