#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bridgeml/dataset.hpp"
#include "bridgeml/dataset_io.hpp"
#include "bridgeml/discretize.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"
#include "helpers.hpp"

using namespace bridgeml;

namespace {

Schema state_schema() {
  return Schema({Attribute::nominal("state", {"VA", "CA"}), Attribute::numeric("span"),
                 Attribute::nominal("design", {"slab", "stringer"}, Role::target)});
}

}  // namespace

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(Schema({Attribute::numeric("x")}), DataError);
  CHECK_THROWS_AS(Schema({Attribute::numeric("x"), Attribute::numeric("x"),
                          Attribute::nominal("c", {"a"}, Role::target)}),
                  DataError);
  CHECK_THROWS_AS(Schema({Attribute::nominal("c", {"a", "a"}, Role::target)}), DataError);
  CHECK_THROWS_AS(Schema({Attribute::numeric("c", Role::target)}), DataError);
  CHECK_THROWS_AS(Schema({Attribute::nominal("c", {"a"}, Role::target), Attribute::nominal("d", {"a"}, Role::target)}),
                  DataError);

  auto s = state_schema();
  CHECK(s.class_index() == 2);
  CHECK(s.num_classes() == 2);
  CHECK(s.feature_names() == std::vector<std::string>{"state", "span"});
  CHECK_THROWS_AS(s.index("nope"), UnknownAttribute);
  CHECK_THROWS_AS(s.index("nope"), ConfigError);
}

TEST_CASE("fingerprint tracks names, kinds, values and roles") {
  auto a = state_schema();
  CHECK(a.fingerprint().size() == 16);
  CHECK(a.fingerprint() == state_schema().fingerprint());
  auto attrs = a.attributes();
  attrs[0].role = Role::meta;
  CHECK(Schema(attrs).fingerprint() != a.fingerprint());
  attrs = a.attributes();
  attrs[0].values = {"VA", "WA"};
  CHECK(Schema(attrs).fingerprint() != a.fingerprint());
}

TEST_CASE("dataset rejects instances that do not fit the schema") {
  auto s = state_schema();
  CHECK_THROWS_AS(Dataset(s, {Instance{{0, 1.0}}}), DataError);
  CHECK_THROWS_AS(Dataset(s, {Instance{{2, 1.0, 0}}}), DataError);
  CHECK_THROWS_AS(Dataset(s, {Instance{{0.5, 1.0, 0}}}), DataError);
  CHECK_NOTHROW(Dataset(s, {Instance{{kMissing, kMissing, kMissing}}}));
}

TEST_CASE("dataset_stats") {
  auto s = state_schema();
  std::vector<Instance> rows(100, Instance{{0, 1.0, 0}});
  auto t = dataset_stats(Dataset(s, rows), "design");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].value == "slab");
  CHECK(t.rows[0].count == 100);
  CHECK(t.rows[0].percent == doctest::Approx(100.0));
  CHECK(t.total == 100);

  auto empty = dataset_stats(Dataset(s), "design");
  CHECK(empty.total == 0);
  CHECK(empty.rows.empty());

  rows.push_back(Instance{{0, 1.0, kMissing}});
  auto withq = dataset_stats(Dataset(s, rows), "design");
  CHECK(withq.rows.back().value == "?");
  CHECK(withq.rows.back().count == 1);

  CHECK_THROWS_AS(dataset_stats(Dataset(s, rows), "span"), ConfigError);
  CHECK_THROWS_AS(dataset_stats(Dataset(s, rows), "zzz"), UnknownAttribute);
}

TEST_CASE("partition_by") {
  auto s = state_schema();
  std::vector<Instance> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({{0, double(i), 0}});
  for (int i = 0; i < 4; ++i) rows.push_back({{1, double(i), 1}});
  rows.push_back({{kMissing, 3.0, 1}});
  auto p = partition_by(Dataset(s, rows), "state");
  REQUIRE(p.parts.size() == 2);
  CHECK(p.parts.at("VA").size() == 6);
  CHECK(p.parts.at("CA").size() == 4);
  CHECK(p.rejected == 1);
  CHECK(p.parts.at("VA").schema().at("state").role == Role::meta);

  std::vector<Instance> va(rows.begin(), rows.begin() + 6);
  auto one = partition_by(Dataset(s, va), "state");
  REQUIRE(one.parts.size() == 1);
  CHECK(one.parts.at("VA").instances() == va);

  CHECK_THROWS_AS(partition_by(Dataset(s, rows), "span"), ConfigError);
}

TEST_CASE("project") {
  auto s = state_schema();
  Dataset d(s, {Instance{{0, 5.0, 1}}, Instance{{1, 7.0, 0}}});
  std::vector<std::string> all{"state", "span"};
  auto same = project(d, all);
  CHECK(same.schema() == d.schema());
  CHECK(same.instances() == d.instances());

  auto only_class = project(d, std::vector<std::string>{});
  CHECK(only_class.schema().size() == 1);
  CHECK(only_class[1].values == std::vector<double>{0});

  CHECK_THROWS_AS(project(d, std::vector<std::string>{"nope"}), UnknownAttribute);
}

TEST_CASE("restrict_features and with_role") {
  auto d = Dataset(state_schema(), {Instance{{0, 5.0, 1}}});
  auto r = restrict_features(d, std::vector<std::string>{"span"});
  CHECK(r.schema().feature_names() == std::vector<std::string>{"span"});
  CHECK(r.instances() == d.instances());
  auto back = with_role(r, "state", Role::feature);
  CHECK(back.schema().feature_names() == std::vector<std::string>{"state", "span"});
  CHECK_THROWS_AS(restrict_features(d, std::vector<std::string>{"design"}), ConfigError);
}

TEST_CASE("csv and schema sidecar round trip") {
  auto s = state_schema();
  Dataset d(s, {Instance{{0, 5.25, 1}}, Instance{{kMissing, 0.1 + 0.2, 0}}, Instance{{1, kMissing, kMissing}}});
  auto schema_text = format_schema(s);
  CHECK(parse_schema(schema_text) == s);
  auto back = parse_csv(format_csv(d), s);
  CHECK(back.instances() == d.instances());

  auto dir = testing::scratch_dir("roundtrip");
  save_dataset_dir(d, dir);
  auto loaded = load_dataset_dir(dir);
  CHECK(loaded.schema() == s);
  CHECK(loaded.instances() == d.instances());
}

TEST_CASE("csv errors") {
  auto s = state_schema();
  CHECK_THROWS_AS(parse_csv("state,span\nVA,1\n", s), DataError);
  CHECK_THROWS_AS(parse_csv("state,span,design\nTX,1,slab\n", s), DataError);
  CHECK_THROWS_AS(parse_csv("state,span,design\nVA,abc,slab\n", s), DataError);
  CHECK_THROWS_AS(parse_csv("span,state,design\n1,VA,slab\n", s), DataError);
  CHECK_THROWS_AS(parse_schema("x,numeric,weird\n"), DataError);
}

TEST_CASE("text helpers") {
  CHECK(split_csv_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(split_csv_line("\"say \"\"hi\"\"\",x") == std::vector<std::string>{"say \"hi\"", "x"});
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("plain") == "plain");
  CHECK(parse_double("1.5") == 1.5);
  CHECK_FALSE(parse_double("1.5x"));
  CHECK_FALSE(parse_double("nan"));
  CHECK_FALSE(parse_double("inf"));
  CHECK(parse_int("-42") == -42);
  CHECK_FALSE(parse_int("4.2"));
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5})
    CHECK(parse_double(format_double(v)) == v);
  CHECK(format_display(9.149999999999999) == "9.15");
}

TEST_CASE("discretize") {
  std::vector<LabeledValue> single;
  for (int i = 0; i < 20; ++i) single.push_back({double(i), 0});
  CHECK(mdl_cut_points(single, 2).empty());

  std::vector<LabeledValue> two;
  for (double v : {1, 2, 3, 4}) two.push_back({v, 0});
  for (double v : {10, 11, 12, 13}) two.push_back({v, 1});
  auto cuts = mdl_cut_points(two, 2);
  REQUIRE(cuts.size() == 1);
  CHECK(cuts[0] > 4.0);
  CHECK(cuts[0] < 10.0);
  CHECK(cuts[0] == doctest::Approx(7.0));

  Discretization disc{{2.5, 7.0}};
  CHECK(disc.bin_of(2.5) == 0);
  CHECK(disc.bin_of(2.6) == 1);
  CHECK(disc.bin_of(100) == 2);
  CHECK(disc.labels() == std::vector<std::string>{"(-inf-2.5]", "(2.5-7]", "(7-inf)"});
  CHECK(Discretization{}.labels() == std::vector<std::string>{"all"});

  auto s = state_schema();
  CHECK_THROWS_AS(discretize(Dataset(s, {Instance{{0, 1.0, 0}}}), "state"), ConfigError);
  CHECK_THROWS_AS(discretize(Dataset(s, {Instance{{0, kMissing, 0}}}), "span"), DataError);
}

TEST_CASE("discretize: shuffled labels yield no cut") {
  // Oracle: every candidate cut evaluated against the MDL acceptance test directly.
  std::mt19937_64 rng(11);
  int rejected_everywhere = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LabeledValue> v;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i % 2);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (int i = 0; i < 40; ++i) v.push_back({double(i), labels[i]});

    auto ent = [](double a, double b) {
      double n = a + b, h = 0;
      for (double c : {a, b})
        if (c > 0) h -= c / n * std::log2(c / n);
      return h;
    };
    bool any_accept = false;
    for (int cut = 1; cut < 40; ++cut) {
      double l[2] = {0, 0}, r[2] = {0, 0};
      for (int i = 0; i < 40; ++i) (i < cut ? l : r)[labels[i]] += 1;
      const double n = 40, hs = ent(20, 20), hl = ent(l[0], l[1]), hr = ent(r[0], r[1]);
      const double gain = hs - (cut * hl + (40 - cut) * hr) / n;
      const int k1 = (l[0] > 0) + (l[1] > 0), k2 = (r[0] > 0) + (r[1] > 0);
      const double delta = std::log2(std::pow(3.0, 2) - 2) - (2 * hs - k1 * hl - k2 * hr);
      if (gain > (std::log2(n - 1) + delta) / n) any_accept = true;
    }
    if (!any_accept) {
      ++rejected_everywhere;
      CHECK(mdl_cut_points(v, 2).empty());
    }
  }
  CHECK(rejected_everywhere > 10);
}
