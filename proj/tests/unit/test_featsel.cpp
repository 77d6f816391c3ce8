#include <doctest.h>

#include <vector>

#include "bridgeml/errors.hpp"
#include "bridgeml/featsel.hpp"
#include "bridgeml/synth.hpp"
#include "helpers.hpp"

using namespace bridgeml;

TEST_CASE("entropy") {
  CHECK(entropy(std::vector<double>{5, 5}) == doctest::Approx(1.0));
  CHECK(entropy(std::vector<double>{10, 0}) == 0.0);
  CHECK(entropy(std::vector<double>{9, 5}) == doctest::Approx(0.940286).epsilon(1e-6));
  CHECK_THROWS_AS(entropy(std::vector<double>{0, 0}), ConfigError);
  CHECK_THROWS_AS(entropy(std::vector<double>{3, -1}), ConfigError);
  CHECK(entropy_or_zero(std::vector<double>{0, 0}) == 0.0);
}

TEST_CASE("chi-squared on fixed tables") {
  auto t = ContingencyTable::from_counts({{20, 10}, {10, 20}});
  CHECK(chi_squared(t) == doctest::Approx(20.0 / 3.0).epsilon(1e-9));
  CHECK(chi_squared(ContingencyTable::from_counts({{10, 0}, {0, 10}})) == doctest::Approx(20.0));
  CHECK(chi_squared(ContingencyTable::from_counts({{15, 15}, {15, 15}})) == doctest::Approx(0.0));

  auto one_value = ContingencyTable::from_counts({{7, 3}, {0, 0}});
  CHECK(one_value.degenerate());
  CHECK(chi_squared(one_value) == 0.0);
}

TEST_CASE("chi-squared scales with sample size, info gain does not") {
  auto t1 = ContingencyTable::from_counts({{12, 5, 3}, {4, 9, 7}});
  std::vector<std::vector<double>> scaled = t1.observed;
  for (auto& row : scaled)
    for (auto& v : row) v *= 4;
  CHECK(chi_squared(ContingencyTable::from_counts(scaled)) == doctest::Approx(4 * chi_squared(t1)));

  auto w = testing::weather();
  std::vector<Instance> rows;
  for (int k = 0; k < 3; ++k)
    for (const auto& x : w.instances()) rows.push_back(x);
  Dataset w3(w.schema(), rows);
  CHECK(info_gain(w3, "outlook") == doctest::Approx(info_gain(w, "outlook")).epsilon(1e-12));
  CHECK(chi_squared(w3, "outlook") == doctest::Approx(3 * chi_squared(w, "outlook")));
}

TEST_CASE("weather info gain") {
  auto w = testing::weather();
  CHECK(info_gain(w, "outlook") == doctest::Approx(0.2467).epsilon(1e-4));
  CHECK(info_gain(w, "humidity") == doctest::Approx(0.1518).epsilon(1e-3));
  CHECK(info_gain(w, "windy") == doctest::Approx(0.0481).epsilon(1e-3));
  CHECK(info_gain(w, "temperature") == doctest::Approx(0.0292).epsilon(1e-3));
  auto r = rank_attributes(w, Metric::info_gain);
  REQUIRE(r.size() == 4);
  CHECK(r[0].attribute == "outlook");
  CHECK(r[1].attribute == "humidity");
}

TEST_CASE("cutoff") {
  auto mk = [](std::vector<double> s) {
    std::vector<AttributeScore> v;
    for (std::size_t i = 0; i < s.size(); ++i) v.push_back({"a" + std::to_string(i), s[i]});
    return v;
  };
  auto kept = [](const std::vector<AttributeScore>& v) {
    std::vector<std::string> out;
    for (const auto& s : v)
      if (s.kept) out.push_back(s.attribute);
    return out;
  };
  CHECK(kept(apply_cutoff(mk({100, 90, 50, 40}))) == std::vector<std::string>{"a0", "a1"});
  CHECK(kept(apply_cutoff(mk({100, 20, 15, 14}))) == std::vector<std::string>{"a0", "a1", "a2", "a3"});
  CHECK(kept(apply_cutoff(mk({5}))) == std::vector<std::string>{"a0"});
  auto sorted = apply_cutoff(mk({1, 3, 2}));
  CHECK(sorted[0].attribute == "a1");
  CHECK_THROWS_AS(apply_cutoff(mk({1, 2}), 1.5), ConfigError);
}

TEST_CASE("leave-one-out selection on the high-hazard state") {
  auto all = synth_bridges({6000, 3, 0.05});
  auto wa = partition_by(all, "state").parts.at(std::string(kHighHazardState));
  auto loo = leave_one_out_selection(wa, ClassifierSpec::parse("dtree"), 1.0, 5, 1);
  CHECK(loo.folds == 5);
  auto has = [&](const std::string& a) {
    return std::find(loo.essential.begin(), loo.essential.end(), a) != loo.essential.end();
  };
  CHECK(has("material"));
  CHECK(has("seismic_pga"));
  CHECK_FALSE(has("steel_cost"));
  CHECK_FALSE(has("deck_width"));
  for (const auto& imp : loo.impacts) CHECK(imp.essential == (imp.recall_drop > 1.0));

  auto ranked = rank_attributes(wa, Metric::chi_squared);
  auto combined = combine_selections(ranked, loo);
  for (const auto& e : loo.essential)
    CHECK(std::find(combined.begin(), combined.end(), e) != combined.end());
}
