#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bridgeml/classifier.hpp"
#include "bridgeml/dataset.hpp"
#include "bridgeml/entropy.hpp"

namespace bridgeml {

// Observed counts: attribute values as rows, classes as columns.
struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> observed;

  // Drops all-zero rows and columns.
  static ContingencyTable from_counts(std::vector<std::vector<double>> observed,
                                      std::vector<std::string> row_labels = {},
                                      std::vector<std::string> col_labels = {});

  std::size_t rows() const { return observed.size(); }
  std::size_t cols() const { return observed.empty() ? 0 : observed.front().size(); }
  double grand_total() const;
  // row_total * col_total / grand_total per cell.
  std::vector<std::vector<double>> expected() const;
  bool degenerate() const { return rows() < 2 || cols() < 2; }
};

// Numeric attributes are discretized (supervised, MDL) on d first. MISSING rows are excluded.
ContingencyTable contingency_table(const Dataset& d, std::string_view attr);

// Sum of (N - E)^2 / E. A degenerate table scores 0 and logs a warning.
double chi_squared(const ContingencyTable& t);
double chi_squared(const Dataset& d, std::string_view attr);

// Class entropy minus the weighted entropy after splitting on attr; MISSING forms its own branch.
double info_gain(const Dataset& d, std::string_view attr);

enum class Metric { info_gain, chi_squared };
std::string_view to_string(Metric m);

struct AttributeScore {
  std::string attribute;
  double score = 0.0;
  Metric metric = Metric::chi_squared;
  bool kept = true;
};

// Sorts descending (ties by name). The top two always survive; from the third on, the first
// score below ratio × its predecessor is dropped along with everything after it.
std::vector<AttributeScore> apply_cutoff(std::vector<AttributeScore> scores, double ratio = 0.7);

std::vector<AttributeScore> rank_attributes(const Dataset& d, Metric metric, double ratio = 0.7);

struct LooImpact {
  std::string attribute;
  double recall_drop = 0.0;     // percentage points, baseline minus without-attribute
  double precision_drop = 0.0;  // reported only
  bool essential = false;
};

struct LooResult {
  double baseline_recall = 0.0;  // percent
  double baseline_precision = 0.0;
  std::size_t folds = 0;
  std::vector<LooImpact> impacts;      // schema feature order
  std::vector<std::string> essential;  // schema feature order
};

// Leave-one-attribute-out: cross-validated weighted recall with and without each feature.
// A feature is essential when removing it costs more than `threshold_points` points.
// Falls back to leave-one-out CV when folds would average fewer than 10 instances.
LooResult leave_one_out_selection(const Dataset& d, const ClassifierSpec& spec, double threshold_points = 1.0,
                                  std::size_t folds = 10, std::uint64_t seed = 1);

// Union of cutoff-kept and LOO-essential attributes, in ranking order then LOO order.
std::vector<std::string> combine_selections(const std::vector<AttributeScore>& ranked, const LooResult& loo);

}  // namespace bridgeml
