#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bridgeml/classifier.hpp"
#include "bridgeml/discretize.hpp"

namespace bridgeml {

struct BayesNetOptions {
  int max_parents = 2;  // counts the class parent
  double alpha = 0.5;   // Dirichlet pseudo-count per CPT cell

  static BayesNetOptions from_spec(const ClassifierSpec& spec);
  void validate() const;
};

// Nodes are schema attribute indices; node 0 is the class.
struct NetworkStructure {
  std::vector<std::size_t> nodes;
  std::vector<std::vector<std::size_t>> parents;  // positions into `nodes`

  std::size_t max_parent_count() const;
  bool is_acyclic() const;
};

// P(node value | parent configuration), row-major over configurations.
struct Cpt {
  std::size_t arity = 0;
  std::vector<std::size_t> parent_arities;
  std::vector<double> probs;

  std::size_t num_configs() const;
  // Mixed-radix index of parent values (first parent most significant).
  std::size_t config_index(std::span<const std::size_t> parent_values) const;
  double at(std::size_t config, std::size_t value) const { return probs[config * arity + value]; }
};

// Log Cooper-Herskovits score of one node given parents. All columns must be nominal with
// no MISSING values.
double k2_node_score(const Dataset& d, std::size_t node, std::span<const std::size_t> parents);

// Greedy K2 starting from naive Bayes. `ordering` lists schema indices: the class first,
// then every feature exactly once.
NetworkStructure k2_search(const Dataset& d, std::span<const std::size_t> ordering, int max_parents = 2);

// Class first, then features by descending chi-squared score (ties by name).
std::vector<std::size_t> default_k2_ordering(const Dataset& d);

// Smoothed relative frequencies; instances with a MISSING node or parent value are skipped.
std::vector<Cpt> estimate_cpts(const NetworkStructure& s, const Dataset& d, double alpha = 0.5);

struct ContributionRow {
  std::string node;
  bool skipped = false;           // value or a parent value MISSING/unseen
  std::vector<double> log_prob;   // per class
};

struct ContributionTable {
  std::vector<std::string> classes;
  std::vector<double> log_prior;
  std::vector<ContributionRow> rows;

  // Adds prior and contributions per class, then normalizes in log space.
  ClassDistribution compose() const;
};

class BayesNet final : public Model {
 public:
  static BayesNet fit(const Dataset& d, const BayesNetOptions& opts = {});
  // Fit with an explicit node ordering (schema indices, class first).
  static BayesNet fit(const Dataset& d, const BayesNetOptions& opts, std::span<const std::size_t> ordering);
  static BayesNet read_body(std::istream& in, const Schema& schema);

  ModelKind kind() const override { return ModelKind::bayesnet; }
  ClassDistribution distribution(const Instance& x) const override;
  std::string describe() const override;
  std::vector<std::string> explain_text(const Instance& x) const override;
  void write_body(std::ostream& out) const override;

  ContributionTable explain_contributions(const Instance& x) const;

  const NetworkStructure& structure() const { return structure_; }
  const std::vector<Cpt>& cpts() const { return cpts_; }

 private:
  // Node value for x after discretization; nullopt when MISSING or unseen in training.
  std::optional<std::size_t> node_value(const Instance& x, std::size_t pos) const;
  std::vector<std::string> node_labels(std::size_t pos) const;

  Schema schema_;
  std::map<std::size_t, Discretization> disc_;  // numeric feature index -> bins
  NetworkStructure structure_;
  std::vector<Cpt> cpts_;
  std::vector<std::vector<double>> seen_;  // per node, training weight of each value
};

}  // namespace bridgeml
