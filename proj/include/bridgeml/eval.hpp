#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bridgeml/classifier.hpp"
#include "bridgeml/dataset.hpp"

namespace bridgeml {

// Rows are actual classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : n_(classes), cells_(classes * classes, 0.0) {}
  // Row-major square matrix.
  static ConfusionMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t classes() const { return n_; }
  double at(std::size_t actual, std::size_t predicted) const { return cells_[actual * n_ + predicted]; }
  void add(std::size_t actual, std::size_t predicted, double count = 1.0) { cells_[actual * n_ + predicted] += count; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);

  double total() const;
  double trace() const;
  double row_sum(std::size_t actual) const;
  double col_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> cells_;
};

struct ClassMetrics {
  std::string cls;
  double precision = 0.0;  // 0 when the class is never predicted
  double recall = 0.0;     // 0 when the class has no support
  double support = 0.0;
};

struct Metrics {
  std::vector<ClassMetrics> per_class;
  double weighted_precision = 0.0;  // support-weighted means, in [0, 1]
  double weighted_recall = 0.0;
};

// Throws ConfigError for an empty matrix.
Metrics precision_recall(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

// k disjoint index sets covering every instance. Within each class, instances are shuffled
// with `seed` and dealt round-robin, continuing from where the previous class stopped.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed);

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::optional<double> resample_bias;  // resample each training fold when set
  double resample_size_pct = 100.0;
  bool resample_whole_dataset = false;  // resample once before splitting instead
};

struct EvalReport {
  std::string protocol;  // "cv10", "holdout:<state>", ...
  std::string spec;
  std::uint64_t seed = 0;
  std::size_t folds = 0;
  std::optional<double> bias;
  std::vector<std::string> attributes;
  std::vector<std::string> class_names;
  ConfusionMatrix confusion;
  Metrics metrics;
};

// Every instance lands in exactly one test fold; the aggregate confusion sums per-fold tests.
EvalReport cross_validate(const Dataset& d, const ClassifierSpec& spec, const CvOptions& opts = {});

// Trains on `train`, tests on `test` (same schema).
EvalReport train_test(const Dataset& train, const Dataset& test, const ClassifierSpec& spec);

// Class c is drawn with probability (1 - bias) * p_c + bias / C over the C classes present,
// then an instance uniformly within that class, with replacement.
Dataset resample(const Dataset& d, double bias, double size_pct = 100.0, std::uint64_t seed = 1);
double resample_target(double class_proportion, double bias, std::size_t classes_present);

struct SpreadSummary {
  std::size_t n = 0;
  double mean_recall = 0.0, sd_recall = 0.0;        // percent
  double mean_precision = 0.0, sd_precision = 0.0;  // percent
};

SpreadSummary summarize(const std::vector<const EvalReport*>& reports);

struct HoldoutResult {
  std::map<std::string, EvalReport> per_state;
  SpreadSummary summary;
  std::vector<std::string> notes;
};

// Trains on every state except one and tests on that state, for each state in turn.
HoldoutResult hold_one_state_out(const Dataset& national, const ClassifierSpec& spec,
                                 std::string_view state_attr = "state");

// Per-state 10-fold (or opts.folds) cross-validation after partitioning on state_attr.
HoldoutResult per_state_cv(const Dataset& national, const ClassifierSpec& spec, std::string_view state_attr,
                           const CvOptions& opts);

struct ClimateRow {
  double temperature = 0, humidity = 0, rain = 0, snow = 0;
};
using ClimateTable = std::map<std::string, ClimateRow>;

// CSV `state,temp,humidity,rain,snow` with a header row.
ClimateTable read_climate_table(const std::filesystem::path& path);
ClimateTable parse_climate_table(std::string_view text);

// Pearson r, or nullopt when either vector has zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationResult {
  std::vector<std::string> states;  // matched, sorted
  std::map<std::string, std::optional<double>> r;  // "temperature", "humidity", "rain", "snow"
};

// Throws DataError when fewer than 3 states match.
CorrelationResult correlate_external(const std::map<std::string, double>& recall_by_state, const ClimateTable& ct);

}  // namespace bridgeml
