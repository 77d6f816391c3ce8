#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bridgeml/classifier.hpp"

namespace bridgeml {

struct DTreeOptions {
  double confidence = 0.35;  // pessimistic pruning confidence, (0, 0.5]
  double min_objects = 2;    // minimum weight per leaf
  bool subtree_raising = true;
  bool reduced_error = false;  // hold out one of `folds` folds for pruning instead
  int folds = 3;
  bool unpruned = false;
  std::uint64_t seed = 1;

  static DTreeOptions from_spec(const ClassifierSpec& spec);
  void validate() const;
};

struct TreeNode {
  std::vector<double> counts;  // weighted class counts of training data at this node
  int attribute = -1;          // -1 for leaves
  double threshold = 0.0;      // numeric splits: child 0 takes <= threshold, child 1 takes >
  std::vector<std::size_t> branch_values;  // nominal splits: value index per child
  std::vector<double> branch_weights;      // share of known training weight per child
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t node_count() const;
  std::size_t leaf_count() const;
};

struct PathStep {
  std::string attribute;
  std::string test;   // "= sunny", "<= 7.5", "> 7.5", or "missing"
  std::string value;  // instance value, "?" when MISSING
  // Filled when the value is MISSING or unseen: (branch test, weight) over every branch.
  std::vector<std::pair<std::string, double>> routing;
};

struct PathExplanation {
  std::vector<PathStep> steps;
  ClassDistribution distribution;
};

// C4.5-style tree: gain-ratio splits, binary numeric thresholds, fractional routing of
// MISSING values, pessimistic pruning with optional subtree raising.
class DecisionTree final : public Model {
 public:
  DecisionTree(Schema schema, TreeNode root) : schema_(std::move(schema)), root_(std::move(root)) {}

  static DecisionTree fit(const Dataset& d, const DTreeOptions& opts = {});
  // Grows without any pruning (collapse still applies).
  static DecisionTree grow(const Dataset& d, const DTreeOptions& opts = {});
  static DecisionTree read_body(std::istream& in, const Schema& schema);

  // Pessimistic pruning on a grown tree, using the data it was grown from.
  DecisionTree pruned(const Dataset& d, double confidence, bool subtree_raising) const;

  ModelKind kind() const override { return ModelKind::dtree; }
  ClassDistribution distribution(const Instance& x) const override;
  std::string describe() const override;
  std::vector<std::string> explain_text(const Instance& x) const override;
  void write_body(std::ostream& out) const override;

  PathExplanation explain_path(const Instance& x) const;

  const TreeNode& root() const { return root_; }
  const Schema& schema() const { return schema_; }

 private:
  Schema schema_;
  TreeNode root_;
};

// Upper confidence bound on extra errors for a leaf with n instances and e errors.
double pessimistic_extra_errors(double n, double e, double confidence);

}  // namespace bridgeml
