#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bridgeml/dataset.hpp"

namespace bridgeml {

enum class ModelKind { dtree, bayesnet, oner };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

// Normalized class probabilities in schema class order.
struct ClassDistribution {
  std::vector<double> p;

  // Lowest index wins ties.
  std::size_t argmax() const;
  // Normalizes non-negative weights; an all-zero vector becomes uniform.
  static ClassDistribution from_weights(std::vector<double> w);
  // (count + 1) / (total + C).
  static ClassDistribution laplace(const std::vector<double>& counts);
};

// Which learner to run and with what parameters. Parameters are free-form key/value
// pairs checked against the kind by validate().
struct ClassifierSpec {
  ModelKind kind = ModelKind::dtree;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;

  // "dtree", "bayesnet:max_parents=2,alpha=0.5", ...
  static ClassifierSpec parse(std::string_view text);
  std::string to_string() const;
  void validate() const;

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  bool operator==(const ClassifierSpec&) const = default;
};

// A fitted learner. Instances passed in conform to the schema the model was trained on.
class Model {
 public:
  virtual ~Model() = default;
  virtual ModelKind kind() const = 0;
  virtual ClassDistribution distribution(const Instance& x) const = 0;
  // Multi-line human-readable structure.
  virtual std::string describe() const = 0;
  // One line per reasoning step for instance x.
  virtual std::vector<std::string> explain_text(const Instance& x) const = 0;
  virtual void write_body(std::ostream& out) const = 0;
};

class TrainedModel {
 public:
  TrainedModel(Schema schema, std::shared_ptr<const Model> model, ClassifierSpec spec);

  const Schema& schema() const { return schema_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const ClassifierSpec& spec() const { return spec_; }
  ModelKind kind() const { return model_->kind(); }
  const Model& model() const { return *model_; }

  // Throws SchemaMismatch when the slot count differs from the training schema.
  ClassDistribution predict_distribution(const Instance& x) const;
  // Throws SchemaMismatch when `schema` is not the training schema.
  ClassDistribution predict_distribution(const Instance& x, const Schema& schema) const;
  std::size_t predict(const Instance& x) const { return predict_distribution(x).argmax(); }

  std::string inspect() const;

  // Free-form metadata carried through serialization (state, cv_recall, ...).
  std::map<std::string, std::string> metadata;

 private:
  Schema schema_;
  std::shared_ptr<const Model> model_;
  ClassifierSpec spec_;
  std::string fingerprint_;
};

// Drops class-MISSING instances, validates the spec, and dispatches to the per-kind trainer.
TrainedModel fit(const ClassifierSpec& spec, const Dataset& d);

// Text format, see model_io.cpp for the layout.
void save_model(const TrainedModel& m, std::ostream& out);
std::string serialize_model(const TrainedModel& m);
TrainedModel load_model(std::istream& in);
TrainedModel read_model_file(const std::string& path);

}  // namespace bridgeml
