#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bridgeml/dataset.hpp"
#include "bridgeml/dataset_io.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(BRIDGEML_TEST_DATA) / rel;
}

inline bridgeml::Dataset weather() { return bridgeml::load_dataset_dir(data_path("weather")); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("bridgeml_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Small all-nominal dataset: `features` attributes with 2..4 values, 2..3 classes, and
// roughly `missing_rate` MISSING feature values.
inline bridgeml::Dataset random_nominal(std::mt19937_64& rng, std::size_t n, std::size_t features,
                                        double missing_rate = 0.0) {
  using namespace bridgeml;
  std::uniform_int_distribution<int> arity(2, 4), classes(2, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Attribute> attrs;
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<std::string> vals;
    const int r = arity(rng);
    for (int v = 0; v < r; ++v) vals.push_back("v" + std::to_string(v));
    attrs.push_back(Attribute::nominal("a" + std::to_string(f), vals));
  }
  std::vector<std::string> cls;
  const int c = classes(rng);
  for (int k = 0; k < c; ++k) cls.push_back("c" + std::to_string(k));
  attrs.push_back(Attribute::nominal("cls", cls, Role::target));
  Schema s(attrs);
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Instance x;
    for (std::size_t f = 0; f < features; ++f) {
      if (u(rng) < missing_rate) x.values.push_back(kMissing);
      else x.values.push_back(std::floor(u(rng) * static_cast<double>(s[f].arity())));
    }
    x.values.push_back(std::floor(u(rng) * c));
    rows.push_back(std::move(x));
  }
  return Dataset(s, rows);
}

}  // namespace testing
