#include <doctest.h>

#include <cmath>
#include <random>

#include "bridgeml/dataset_io.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/ingest.hpp"
#include "helpers.hpp"

using namespace bridgeml;

namespace {

IngestResult load(NbiOptions opts = {}) {
  return parse_nbi(testing::data_path("nbi/inventory.dat"), read_layout(testing::data_path("nbi/layout.cfg")),
                   read_schema(testing::data_path("nbi/target.schema")), opts);
}

double cell(const Dataset& d, std::size_t row, std::string_view attr) {
  return d[row].values[d.schema().index(attr)];
}

std::string nominal(const Dataset& d, std::size_t row, std::string_view attr) {
  const auto& a = d.schema().at(attr);
  return a.values[static_cast<std::size_t>(cell(d, row, attr))];
}

}  // namespace

TEST_CASE("layout parsing and validation") {
  auto l = read_layout(testing::data_path("nbi/layout.cfg"));
  CHECK(l.fields.size() == 11);
  CHECK(l.record_length() == 46);
  REQUIRE(l.find("structure_length"));
  CHECK(l.find("structure_length")->scale == 0.1);
  CHECK_THROWS_AS(parse_layout("a,1,4,code\nb,3,6,code\n"), ConfigError);
  CHECK_THROWS_AS(parse_layout("a,1,4,code\na,5,6,code\n"), ConfigError);
  CHECK_THROWS_AS(parse_layout("a,5,4,code\n"), ConfigError);
  CHECK_THROWS_AS(parse_layout("a,1,4,float\n"), ConfigError);
}

TEST_CASE("fixed-width ingest with every reject reason") {
  NbiOptions opts;
  opts.post_1971 = true;
  opts.key_field = "structure_number";
  auto r = load(opts);
  CHECK(r.lines == 11);
  CHECK(r.data.size() == 5);
  CHECK(r.rejects.count(RejectReason::malformed_field) == 3);
  CHECK(r.rejects.count(RejectReason::pre_1971) == 1);
  CHECK(r.rejects.count(RejectReason::excluded_region) == 1);
  CHECK(r.rejects.count(RejectReason::duplicate) == 1);

  std::vector<std::size_t> lines;
  for (const auto& rej : r.rejects.rejects) lines.push_back(rej.line);
  CHECK(lines == std::vector<std::size_t>{2, 3, 4, 5, 7, 8});

  const auto& d = r.data;
  CHECK(nominal(d, 0, "state") == "VA");
  CHECK(cell(d, 0, "structure_length") == doctest::Approx(120.0));
  CHECK(cell(d, 0, "avg_span") == doctest::Approx(40.0));
  CHECK(cell(d, 0, "max_span") == doctest::Approx(45.0));
  CHECK(cell(d, 0, "lon") == doctest::Approx(-121.981));
  CHECK(is_missing(cell(d, 1, "avg_span")));
  CHECK(is_missing(cell(d, 2, "max_span")));
  CHECK(nominal(d, 2, "design_type") == "19");
  CHECK(cell(d, 4, "year_built") == 1971);
  CHECK_FALSE(r.warnings.empty());

  auto report = format_reject_report(r.rejects);
  CHECK(report.rfind("line,reason,detail,raw\n", 0) == 0);
  CHECK(report.find("excluded-region") != std::string::npos);
  CHECK(report.find("pre-1971") != std::string::npos);
}

TEST_CASE("filters are opt-in") {
  auto r = load();
  CHECK(r.rejects.count(RejectReason::pre_1971) == 0);
  CHECK(r.rejects.count(RejectReason::duplicate) == 0);
  CHECK(r.data.size() == 7);
}

TEST_CASE("unknown target attributes are a configuration error") {
  auto layout = read_layout(testing::data_path("nbi/layout.cfg"));
  Schema s({Attribute::numeric("deck_area"), Attribute::nominal("design_type", {"01"}, Role::target)});
  CHECK_THROWS_AS(parse_nbi_text("", layout, s), ConfigError);
}

TEST_CASE("average span") {
  CHECK(*derive_average_span(120, 3) == 40);
  CHECK_FALSE(derive_average_span(120, 0));
  CHECK_FALSE(derive_average_span(kMissing, 2));
}

TEST_CASE("seismic grid snapping and fusion") {
  auto g = SeismicGrid::read(testing::data_path("nbi/grid.dat"));
  CHECK(g.size() == 85);
  CHECK(g.snapped(37.026) == doctest::Approx(37.05));
  CHECK(g.snapped(-121.981) == doctest::Approx(-122.00));
  CHECK(g.snap(0.025) == 1);
  CHECK(g.snap(-0.025) == 0);
  CHECK(*g.lookup(37.026, -121.981) == doctest::Approx(0.487));
  CHECK_FALSE(g.lookup(0, 0));
  CHECK_THROWS_AS(SeismicGrid::parse("1 2\n"), DataError);
  CHECK_THROWS_AS(SeismicGrid::parse("1 2 -0.1\n"), DataError);

  auto r = load();
  auto fused = attach_seismic(r.data, g);
  const auto& d = fused.data;
  CHECK(d.schema().at(kSeismicAttr).role == Role::feature);
  CHECK(cell(d, 0, kSeismicAttr) == doctest::Approx(0.487));
  CHECK_THROWS_AS(attach_seismic(r.data, SeismicGrid{}), ConfigError);

  SeismicGrid partial;
  partial.set(37.05, -122.0, 0.5);
  auto part = attach_seismic(r.data, partial);
  CHECK(cell(part.data, 1, kSeismicAttr) == 0.5);
  CHECK(is_missing(cell(part.data, 3, kSeismicAttr)));
  REQUIRE_FALSE(part.warnings.empty());
  CHECK(part.warnings[0].find("excluded-region") != std::string::npos);
}

TEST_CASE("haversine") {
  CHECK(haversine_km(0, 0, 0, 0) == 0);
  CHECK(haversine_km(0, 0, 0, 1) == doctest::Approx(111.195).epsilon(1e-4));
  CHECK(haversine_km(33.749, -84.388, 47.606, -122.332) == doctest::Approx(3518).epsilon(0.01));
}

TEST_CASE("nearest cost city matches brute force") {
  auto t = CostTable::read(testing::data_path("nbi/costs.csv"));
  CHECK(t.cities().size() == 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lat(25, 50), lon(-125, -70);
  for (int i = 0; i < 200; ++i) {
    double a = lat(rng), b = lon(rng);
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.cities().size(); ++c)
      if (haversine_km(a, b, t.cities()[c].lat, t.cities()[c].lon) <
          haversine_km(a, b, t.cities()[best].lat, t.cities()[best].lon))
        best = c;
    CHECK(t.nearest_city(a, b) == best);
  }
  auto [key, e] = t.resolve(33.75, -84.39, 1992);
  CHECK(t.cities()[key.first].name == "Atlanta");
  CHECK(key.second == 1991);
  CHECK(e.steel == 610);
}

TEST_CASE("cost fusion with deflation") {
  auto r = load();
  CostOptions opts;
  opts.deflator = read_deflator(testing::data_path("nbi/deflator.csv"));
  auto fused = attach_costs(r.data, CostTable::read(testing::data_path("nbi/costs.csv")), opts);
  const auto& d = fused.data;
  CHECK(cell(d, 0, "steel_cost") == doctest::Approx(700 * 2.2));
  CHECK(cell(d, 0, "concrete_cost") == doctest::Approx(175 * 2.2));
  CHECK(cell(d, 0, "steel_concrete_ratio") == doctest::Approx(4.0));

  auto plain = attach_costs(r.data, CostTable::read(testing::data_path("nbi/costs.csv")));
  CHECK(cell(plain.data, 0, "steel_cost") == doctest::Approx(700));
  CHECK_THROWS_AS(parse_deflator("year,multiplier\n1990,abc\n"), DataError);
}
