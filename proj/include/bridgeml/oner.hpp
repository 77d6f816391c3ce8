#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bridgeml/classifier.hpp"
#include "bridgeml/discretize.hpp"

namespace bridgeml {

// Single-attribute rule: each value of the chosen attribute maps to its majority class.
class OneR final : public Model {
 public:
  static OneR fit(const Dataset& d);
  static OneR read_body(std::istream& in, const Schema& schema);

  ModelKind kind() const override { return ModelKind::oner; }
  ClassDistribution distribution(const Instance& x) const override;
  std::string describe() const override;
  std::vector<std::string> explain_text(const Instance& x) const override;
  void write_body(std::ostream& out) const override;

  // Schema index of the rule attribute; nullopt for a majority-class model.
  std::optional<std::size_t> attribute() const { return attribute_; }
  double training_errors() const { return errors_; }
  // Majority class for bucket b (value index, or the last bucket for MISSING).
  std::size_t rule_class(std::size_t bucket) const;

 private:
  // Bucket for x's rule value, or nullopt when unseen in training.
  std::optional<std::size_t> bucket_of(const Instance& x) const;
  std::string bucket_label(std::size_t b) const;

  Schema schema_;
  std::optional<std::size_t> attribute_;
  std::optional<Discretization> disc_;  // set when the rule attribute is numeric
  std::vector<std::vector<double>> buckets_;  // per value, then MISSING; weighted class counts
  std::vector<double> global_;
  double errors_ = 0.0;
};

}  // namespace bridgeml
