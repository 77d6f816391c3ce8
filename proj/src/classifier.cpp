#include "bridgeml/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "bridgeml/bayesnet.hpp"
#include "bridgeml/dtree.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/oner.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::dtree: return "dtree";
    case ModelKind::bayesnet: return "bayesnet";
    case ModelKind::oner: return "oner";
  }
  return "dtree";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "dtree") return ModelKind::dtree;
  if (s == "bayesnet") return ModelKind::bayesnet;
  if (s == "oner") return ModelKind::oner;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

std::size_t ClassDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

ClassDistribution ClassDistribution::from_weights(std::vector<double> w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0) {
    std::fill(w.begin(), w.end(), w.empty() ? 0.0 : 1.0 / static_cast<double>(w.size()));
  } else {
    for (auto& v : w) v /= total;
  }
  return ClassDistribution{std::move(w)};
}

ClassDistribution ClassDistribution::laplace(const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double denom = total + static_cast<double>(counts.size());
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = (counts[i] + 1.0) / denom;
  return ClassDistribution{std::move(p)};
}

ClassifierSpec ClassifierSpec::parse(std::string_view text) {
  ClassifierSpec spec;
  auto colon = text.find(':');
  spec.kind = parse_model_kind(trim(text.substr(0, colon)));
  if (colon != std::string_view::npos) {
    for (const auto& kv : split(text.substr(colon + 1), ',')) {
      if (trim(kv).empty()) continue;
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("spec parameter '" + kv + "' lacks '='");
      spec.params[std::string(trim(std::string_view(kv).substr(0, eq)))] =
          std::string(trim(std::string_view(kv).substr(eq + 1)));
    }
  }
  spec.validate();
  return spec;
}

std::string ClassifierSpec::to_string() const {
  std::string out(bridgeml::to_string(kind));
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

double ClassifierSpec::get_double(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  auto v = parse_double(it->second);
  if (!v) throw ConfigError("parameter '" + key + "' is not a number: '" + it->second + "'");
  return *v;
}

long long ClassifierSpec::get_int(const std::string& key, long long fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  auto v = parse_int(it->second);
  if (!v) throw ConfigError("parameter '" + key + "' is not an integer: '" + it->second + "'");
  return *v;
}

bool ClassifierSpec::get_bool(const std::string& key, bool fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("parameter '" + key + "' is not a boolean: '" + it->second + "'");
}

void ClassifierSpec::validate() const {
  std::set<std::string> allowed;
  switch (kind) {
    case ModelKind::dtree:
      allowed = {"confidence", "min_objects", "subtree_raising", "reduced_error", "folds", "unpruned"};
      break;
    case ModelKind::bayesnet:
      allowed = {"max_parents", "alpha"};
      break;
    case ModelKind::oner:
      break;
  }
  for (const auto& [k, v] : params)
    if (!allowed.count(k))
      throw ConfigError("parameter '" + k + "' is not valid for " + std::string(bridgeml::to_string(kind)));
  switch (kind) {
    case ModelKind::dtree: (void)DTreeOptions::from_spec(*this); break;
    case ModelKind::bayesnet: (void)BayesNetOptions::from_spec(*this); break;
    case ModelKind::oner: break;
  }
}

TrainedModel::TrainedModel(Schema schema, std::shared_ptr<const Model> model, ClassifierSpec spec)
    : schema_(std::move(schema)), model_(std::move(model)), spec_(std::move(spec)),
      fingerprint_(schema_.fingerprint()) {}

ClassDistribution TrainedModel::predict_distribution(const Instance& x) const {
  if (x.values.size() != schema_.size())
    throw SchemaMismatch("instance has " + std::to_string(x.values.size()) + " slots, model expects " +
                         std::to_string(schema_.size()));
  return model_->distribution(x);
}

ClassDistribution TrainedModel::predict_distribution(const Instance& x, const Schema& schema) const {
  if (schema.fingerprint() != fingerprint_)
    throw SchemaMismatch("schema fingerprint " + schema.fingerprint() + " does not match model " + fingerprint_);
  return predict_distribution(x);
}

std::string TrainedModel::inspect() const {
  std::ostringstream out;
  out << "kind: " << bridgeml::to_string(kind()) << "\n";
  out << "spec: " << spec_.to_string() << "\n";
  out << "schema: " << fingerprint_ << "\n";
  out << "class: " << schema_.class_attribute().name << "\n";
  std::string features;
  for (const auto& f : schema_.feature_names()) features += (features.empty() ? "" : ",") + f;
  out << "features: " << features << "\n";
  for (const auto& [k, v] : metadata) out << k << ": " << v << "\n";
  out << "\n" << model_->describe();
  return out.str();
}

TrainedModel fit(const ClassifierSpec& spec, const Dataset& data) {
  spec.validate();
  Dataset d = drop_missing_class(data);
  if (d.empty()) throw DataError("cannot train on an empty dataset");
  std::shared_ptr<const Model> model;
  switch (spec.kind) {
    case ModelKind::dtree:
      model = std::make_shared<DecisionTree>(DecisionTree::fit(d, DTreeOptions::from_spec(spec)));
      break;
    case ModelKind::bayesnet:
      model = std::make_shared<BayesNet>(BayesNet::fit(d, BayesNetOptions::from_spec(spec)));
      break;
    case ModelKind::oner:
      model = std::make_shared<OneR>(OneR::fit(d));
      break;
  }
  return TrainedModel(d.schema(), std::move(model), spec);
}

}  // namespace bridgeml
