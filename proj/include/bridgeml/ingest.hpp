#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bridgeml/dataset.hpp"

namespace bridgeml {

enum class FieldType { integer, real, code };

struct LayoutField {
  std::string name;
  std::size_t start = 0;  // 1-indexed, inclusive
  std::size_t end = 0;
  FieldType type = FieldType::code;
  double scale = 1.0;
};

struct LayoutSchema {
  std::vector<LayoutField> fields;

  // Largest end column.
  std::size_t record_length() const;
  const LayoutField* find(std::string_view name) const;
  // Throws ConfigError on overlapping spans, duplicate names, or start > end.
  void validate() const;
};

// `name,start,end,type[,scale]` per line; '#' comments and blank lines are skipped.
LayoutSchema parse_layout(std::string_view text);
LayoutSchema read_layout(const std::filesystem::path& path);

enum class RejectReason { malformed_field, pre_1971, excluded_region, duplicate };
std::string_view to_string(RejectReason r);

struct Reject {
  std::size_t line = 0;  // 1-indexed
  std::string raw;
  RejectReason reason = RejectReason::malformed_field;
  std::string detail;
};

struct RejectReport {
  std::vector<Reject> rejects;
  std::size_t count(RejectReason r) const;
};

// CSV `line,reason,detail,raw`.
std::string format_reject_report(const RejectReport& r);

struct NbiOptions {
  bool post_1971 = false;
  int first_year = 1971;  // kept when year >= first_year
  std::string year_field = "year_built";
  std::string state_field = "state";
  std::set<std::string> excluded_states{"AK", "HI", "PR"};
  std::string key_field;  // duplicate detection when set
  std::string length_field = "structure_length";
  std::string spans_field = "main_spans";
  std::string avg_span_name = "avg_span";  // derived when the target schema has it
};

struct IngestResult {
  Dataset data;
  RejectReport rejects;
  std::size_t lines = 0;
  std::vector<std::string> warnings;
};

// Every target schema attribute must be a layout field or the derived average span.
// Code fields feeding a nominal attribute must hold one of its labels (after trimming);
// an empty numeric or code span reads as MISSING.
IngestResult parse_nbi_text(std::string_view text, const LayoutSchema& layout, const Schema& target,
                            const NbiOptions& opts = {});
IngestResult parse_nbi(const std::filesystem::path& path, const LayoutSchema& layout, const Schema& target,
                       const NbiOptions& opts = {});

// total length / span count; nullopt when either is MISSING or non-positive.
std::optional<double> derive_average_span(double total_length, double spans);

double haversine_km(double lat1, double lon1, double lat2, double lon2);

class SeismicGrid {
 public:
  explicit SeismicGrid(double resolution = 0.05);

  // Whitespace-separated `lon lat pga`. Throws DataError on bad lines or negative pga.
  static SeismicGrid parse(std::string_view text, double resolution = 0.05);
  static SeismicGrid read(const std::filesystem::path& path, double resolution = 0.05);

  void set(double lat, double lon, double pga);
  double resolution() const { return res_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  // Nearest grid index; exact halves go to the larger coordinate.
  long long snap(double coord) const;
  double snapped(double coord) const { return static_cast<double>(snap(coord)) * res_; }
  std::optional<double> lookup(double lat, double lon) const;

 private:
  double res_;
  std::map<std::pair<long long, long long>, double> cells_;
};

struct FusionResult {
  Dataset data;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kSeismicAttr = "seismic_pga";

// Adds numeric feature seismic_pga. Throws ConfigError for an empty grid.
FusionResult attach_seismic(const Dataset& d, const SeismicGrid& g, std::string_view lat_attr = "lat",
                            std::string_view lon_attr = "lon");

struct CostCity {
  std::string name;
  double lat = 0, lon = 0;
};

struct CostEntry {
  double steel = 0, concrete = 0;
};

class CostTable {
 public:
  // CSV with header `city,lat,lon,year,steel,concrete`.
  static CostTable parse(std::string_view text);
  static CostTable read(const std::filesystem::path& path);

  void add(const CostCity& city, int year, CostEntry e);
  const std::vector<CostCity>& cities() const { return cities_; }
  const std::map<std::pair<std::size_t, int>, CostEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  std::size_t nearest_city(double lat, double lon) const;
  // Entry for (nearest city, year), else the entry minimizing km + 50 * |year gap|.
  std::pair<std::pair<std::size_t, int>, CostEntry> resolve(double lat, double lon, int year) const;

 private:
  std::vector<CostCity> cities_;
  std::map<std::pair<std::size_t, int>, CostEntry> entries_;
};

// CSV `year,multiplier` with a header row.
std::map<int, double> read_deflator(const std::filesystem::path& path);
std::map<int, double> parse_deflator(std::string_view text);

struct CostOptions {
  std::string lat_attr = "lat", lon_attr = "lon", year_attr = "year_built";
  std::map<int, double> deflator;  // source year -> multiplier; empty means none
};

// Adds steel_cost, concrete_cost, steel_concrete_ratio.
FusionResult attach_costs(const Dataset& d, const CostTable& c, const CostOptions& opts = {});

}  // namespace bridgeml
