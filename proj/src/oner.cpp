#include "bridgeml/oner.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "bridgeml/errors.hpp"
#include "bridgeml/serial.hpp"

namespace bridgeml {

namespace {

std::size_t majority(const std::vector<double>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

double bucket_errors(const std::vector<std::vector<double>>& buckets) {
  double e = 0.0;
  for (const auto& b : buckets) {
    double total = 0.0;
    for (double c : b) total += c;
    if (total > 0) e += total - b[majority(b)];
  }
  return e;
}

}  // namespace

OneR OneR::fit(const Dataset& d) {
  const auto& s = d.schema();
  const auto nc = s.num_classes();
  const auto ci = s.class_index();

  OneR best;
  best.schema_ = s;
  best.global_ = d.class_counts();
  {
    double total = 0.0;
    for (double c : best.global_) total += c;
    best.errors_ = total - best.global_[majority(best.global_)];
  }

  bool have_rule = false;
  for (auto attr : s.feature_indices()) {
    std::optional<Discretization> disc;
    std::size_t arity = s[attr].arity();
    if (s[attr].is_numeric()) {
      disc = fit_discretization(d, attr);
      arity = disc->num_bins();
    }
    std::vector<std::vector<double>> buckets(arity + 1, std::vector<double>(nc, 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& x = d[i];
      const double v = x.values[attr];
      const auto c = static_cast<std::size_t>(x.values[ci]);
      std::size_t b = arity;
      if (!is_missing(v)) b = disc ? disc->bin_of(v) : static_cast<std::size_t>(v);
      buckets[b][c] += x.weight;
    }
    const double e = bucket_errors(buckets);
    if (!have_rule || e < best.errors_) {
      have_rule = true;
      best.attribute_ = attr;
      best.disc_ = std::move(disc);
      best.buckets_ = std::move(buckets);
      best.errors_ = e;
    }
  }
  return best;
}

std::size_t OneR::rule_class(std::size_t bucket) const {
  const auto& b = buckets_.at(bucket);
  double total = 0.0;
  for (double c : b) total += c;
  return majority(total > 0 ? b : global_);
}

std::optional<std::size_t> OneR::bucket_of(const Instance& x) const {
  if (!attribute_) return std::nullopt;
  const double v = x.values[*attribute_];
  const std::size_t missing_bucket = buckets_.size() - 1;
  std::size_t b = missing_bucket;
  if (!is_missing(v)) {
    if (disc_) b = disc_->bin_of(v);
    else if (v >= 0 && static_cast<std::size_t>(v) < missing_bucket) b = static_cast<std::size_t>(v);
  }
  double total = 0.0;
  for (double c : buckets_[b]) total += c;
  if (total <= 0 && b != missing_bucket) {
    // Unseen value: fall back to the MISSING rule when it has data.
    b = missing_bucket;
    total = 0.0;
    for (double c : buckets_[b]) total += c;
  }
  if (total <= 0) return std::nullopt;
  return b;
}

ClassDistribution OneR::distribution(const Instance& x) const {
  auto b = bucket_of(x);
  return ClassDistribution::laplace(b ? buckets_[*b] : global_);
}

std::string OneR::bucket_label(std::size_t b) const {
  if (b + 1 == buckets_.size()) return "?";
  if (disc_) return disc_->labels()[b];
  return schema_[*attribute_].values[b];
}

std::string OneR::describe() const {
  std::ostringstream out;
  const auto& cls = schema_.class_attribute();
  if (!attribute_) {
    out << "majority class -> " << cls.values[majority(global_)] << "\n";
    return out.str();
  }
  out << schema_[*attribute_].name << ":\n";
  for (std::size_t b = 0; b < buckets_.size(); ++b) {
    double total = 0.0;
    for (double c : buckets_[b]) total += c;
    if (total <= 0) continue;
    out << "  " << bucket_label(b) << " -> " << cls.values[rule_class(b)] << "\n";
  }
  out << "  (unseen) -> " << cls.values[majority(global_)] << "\n";
  out << "training errors: " << errors_ << "\n";
  return out.str();
}

std::vector<std::string> OneR::explain_text(const Instance& x) const {
  const auto& cls = schema_.class_attribute();
  auto b = bucket_of(x);
  if (!b) return {"no rule applies; predicting the majority class " + cls.values[majority(global_)]};
  return {schema_[*attribute_].name + " = " + bucket_label(*b) + " -> " + cls.values[rule_class(*b)]};
}

void OneR::write_body(std::ostream& out) const {
  out << "attribute " << (attribute_ ? static_cast<long long>(*attribute_) : -1LL) << "\n";
  serial::write_vector(out, "cuts", disc_ ? disc_->cuts : std::vector<double>{});
  out << "numeric " << (disc_ ? 1 : 0) << "\n";
  serial::write_vector(out, "global", global_);
  out << "buckets " << buckets_.size() << "\n";
  for (const auto& b : buckets_) serial::write_vector(out, "bucket", b);
  serial::write_double(out, "errors", errors_);
}

OneR OneR::read_body(std::istream& in, const Schema& schema) {
  OneR m;
  m.schema_ = schema;
  long long attr = serial::read_int(in, "attribute");
  auto cuts = serial::read_vector(in, "cuts");
  bool numeric = serial::read_int(in, "numeric") != 0;
  m.global_ = serial::read_vector(in, "global");
  auto nb = serial::read_int(in, "buckets");
  for (long long i = 0; i < nb; ++i) m.buckets_.push_back(serial::read_vector(in, "bucket"));
  m.errors_ = serial::read_double(in, "errors");
  if (attr >= 0) {
    if (static_cast<std::size_t>(attr) >= schema.size()) throw DataError("model: rule attribute out of range");
    m.attribute_ = static_cast<std::size_t>(attr);
  }
  if (numeric) m.disc_ = Discretization{std::move(cuts)};
  if (m.global_.size() != schema.num_classes()) throw DataError("model: class count mismatch");
  return m;
}

}  // namespace bridgeml
