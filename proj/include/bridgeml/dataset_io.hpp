#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bridgeml/dataset.hpp"

namespace bridgeml {

// Sidecar schema: one line per attribute, `name,kind[,v1|v2|...],role`.
// Blank lines and lines starting with '#' are ignored.
Schema parse_schema(std::string_view text);
std::string format_schema(const Schema& s);
Schema read_schema(const std::filesystem::path& path);

// CSV with a header row matching the schema's attribute names in order; `?` marks MISSING.
// Instance weights are not stored; every instance reads back with weight 1.
Dataset parse_csv(std::string_view text, const Schema& schema);
std::string format_csv(const Dataset& d);
Dataset read_csv(const std::filesystem::path& path, const Schema& schema);

// A dataset directory holds dataset.csv and dataset.schema.
inline constexpr std::string_view kDatasetCsv = "dataset.csv";
inline constexpr std::string_view kDatasetSchema = "dataset.schema";

Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset_dir(const Dataset& d, const std::filesystem::path& dir);

}  // namespace bridgeml
