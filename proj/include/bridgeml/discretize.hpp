#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bridgeml/dataset.hpp"

namespace bridgeml {

enum class BinningMethod { mdl, equal_frequency };

// Cut points c0 < c1 < ... split the line into (-inf,c0], (c0,c1], ..., (ck,inf).
struct Discretization {
  std::vector<double> cuts;

  std::size_t num_bins() const { return cuts.size() + 1; }
  std::size_t bin_of(double v) const;
  std::vector<std::string> labels() const;
};

struct LabeledValue {
  double value;
  std::size_t cls;
  double weight = 1.0;
};

// Recursive entropy-minimizing binary cuts, each accepted only when it passes the
// minimum-description-length test. Input need not be sorted.
std::vector<double> mdl_cut_points(std::vector<LabeledValue> values, std::size_t num_classes);

std::vector<double> equal_frequency_cut_points(std::vector<double> values, std::size_t bins);

// Fits cut points on the known values of a numeric attribute (MISSING and class-MISSING skipped).
Discretization fit_discretization(const Dataset& d, std::size_t attr,
                                  BinningMethod method = BinningMethod::mdl, std::size_t bins = 10);

// Replaces a numeric column by its bin index under a fitted discretization.
Dataset apply_discretization(const Dataset& d, std::size_t attr, const Discretization& disc);

// Convenience: fit on d and apply. Throws for nominal attributes or all-MISSING columns.
Dataset discretize(const Dataset& d, std::string_view attr,
                   BinningMethod method = BinningMethod::mdl, std::size_t bins = 10);

}  // namespace bridgeml
