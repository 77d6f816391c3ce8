#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bridgeml {

// Slot value for an absent observation. Never a category index.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class AttrKind { nominal, numeric };
enum class Role { feature, target, meta };

std::string_view to_string(AttrKind kind);
std::string_view to_string(Role role);

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::numeric;
  std::vector<std::string> values;  // category labels, nominal only
  Role role = Role::feature;

  static Attribute nominal(std::string name, std::vector<std::string> values,
                           Role role = Role::feature);
  static Attribute numeric(std::string name, Role role = Role::feature);

  bool is_nominal() const { return kind == AttrKind::nominal; }
  bool is_numeric() const { return kind == AttrKind::numeric; }
  std::size_t arity() const { return values.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const Attribute&) const = default;
};

// Ordered attribute list with exactly one nominal class attribute.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const { return attrs_; }
  std::size_t size() const { return attrs_.size(); }
  const Attribute& operator[](std::size_t i) const { return attrs_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws UnknownAttribute.
  std::size_t index(std::string_view name) const;
  const Attribute& at(std::string_view name) const { return attrs_[index(name)]; }

  std::size_t class_index() const { return class_index_; }
  const Attribute& class_attribute() const { return attrs_[class_index_]; }
  std::size_t num_classes() const { return class_attribute().arity(); }

  // Indices of role=feature attributes, in schema order.
  std::vector<std::size_t> feature_indices() const;
  std::vector<std::string> feature_names() const;

  // Stable 16-hex-digit hash of names, kinds, values and roles.
  std::string fingerprint() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Attribute> attrs_;
  std::size_t class_index_ = 0;
};

struct Instance {
  std::vector<double> values;
  double weight = 1.0;

  bool operator==(const Instance& o) const;
};

// Immutable once constructed. Every instance is checked against the schema.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema, std::vector<Instance> instances = {});

  const Schema& schema() const { return schema_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  // Class index of instance i, or nullopt when MISSING.
  std::optional<std::size_t> class_of(std::size_t i) const;
  std::vector<double> class_counts() const;  // weighted
  double total_weight() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_instances(std::vector<Instance> instances) const;

 private:
  Schema schema_;
  std::vector<Instance> instances_;
};

struct FrequencyRow {
  std::string value;  // "?" for MISSING
  std::size_t count = 0;
  double percent = 0.0;
};

struct FrequencyTable {
  std::string attribute;
  std::vector<FrequencyRow> rows;  // schema order, MISSING last when present
  std::size_t total = 0;
};

FrequencyTable dataset_stats(const Dataset& d, std::string_view attr);

struct Partition {
  std::map<std::string, Dataset> parts;  // keyed by category label
  std::size_t rejected = 0;              // instances with MISSING key
};

// Splits by a nominal attribute. The key attribute becomes role=meta in every part.
Partition partition_by(const Dataset& d, std::string_view attr);

// Keeps the listed attributes plus the class, in schema order.
Dataset project(const Dataset& d, std::span<const std::string> keep);

// Marks every feature not listed as meta; unlike project() the columns stay.
Dataset restrict_features(const Dataset& d, std::span<const std::string> features);

Dataset with_role(const Dataset& d, std::string_view attr, Role role);

// Appends a column. values.size() must equal d.size().
Dataset append_attribute(const Dataset& d, Attribute attr, std::span<const double> values);

// Drops instances whose class is MISSING.
Dataset drop_missing_class(const Dataset& d);

}  // namespace bridgeml
