#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "bridgeml/eval.hpp"

namespace bridgeml {

struct GridConfig {
  std::string name;
  std::vector<std::string> attrs;
  std::optional<double> bias;
  std::string baseline;  // empty: no delta table
};

// Plain-text grid:
//   [global]  state_attr, folds, seed, models (spec strings), states, resample_whole_dataset
//   [config NAME]  attrs, bias, baseline
// `key = value`, lists comma-separated; '#' starts a comment line.
struct ExperimentGrid {
  std::string state_attr = "state";
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> models{"dtree", "bayesnet"};
  std::vector<std::string> states;  // empty: every state with data
  bool resample_whole_dataset = false;
  std::vector<GridConfig> configs;

  // Throws ConfigError on bad specs, duplicate or unknown baselines.
  void validate() const;
};

ExperimentGrid parse_grid(std::string_view text);
ExperimentGrid read_grid(const std::filesystem::path& path);

// (config, model spec, state)
using CellKey = std::tuple<std::string, std::string, std::string>;

struct ExperimentResult {
  std::map<CellKey, EvalReport> reports;
  std::vector<std::string> notes;
};

// Unknown attributes in a config raise UnknownAttribute before any model is trained.
ExperimentResult run_experiment(const Dataset& national, const ExperimentGrid& grid);

struct DeltaRow {
  std::string state, model;
  double recall = 0, precision = 0;  // percentage points, config minus baseline
};

std::vector<DeltaRow> deltas(const ExperimentResult& r, std::string_view config, std::string_view baseline);

// absolute.csv, delta_<cfg>_vs_<base>.csv, per_class.csv, summary.json
void write_experiment(const ExperimentResult& r, const ExperimentGrid& grid, const std::filesystem::path& out);

}  // namespace bridgeml
