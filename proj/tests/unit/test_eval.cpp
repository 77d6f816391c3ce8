#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bridgeml/errors.hpp"
#include "bridgeml/eval.hpp"
#include "bridgeml/synth.hpp"
#include "helpers.hpp"

using namespace bridgeml;

TEST_CASE("precision and recall from a confusion matrix") {
  auto cm = ConfusionMatrix::from_rows({{8, 2, 0}, {1, 9, 0}, {0, 0, 10}});
  auto m = precision_recall(cm, {"a", "b", "c"});
  CHECK(m.weighted_recall == doctest::Approx(0.9));
  CHECK(m.weighted_precision == doctest::Approx((8.0 / 9 * 10 + 9.0 / 11 * 10 + 10) / 30).epsilon(1e-12));
  CHECK(m.weighted_precision == doctest::Approx(0.9024).epsilon(1e-4));
  CHECK(m.per_class[0].recall == doctest::Approx(0.8));

  auto never = ConfusionMatrix::from_rows({{5, 0}, {5, 0}});
  auto nm = precision_recall(never, {"a", "b"});
  CHECK(nm.per_class[1].precision == 0.0);
  CHECK_THROWS_AS(precision_recall(ConfusionMatrix(2), {"a", "b"}), ConfigError);
}

TEST_CASE("weighted recall equals accuracy") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cell(0, 20);
  for (int t = 0; t < 50; ++t) {
    ConfusionMatrix cm(4);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t p = 0; p < 4; ++p) cm.add(a, p, cell(rng));
    if (cm.total() == 0) continue;
    auto m = precision_recall(cm, {"a", "b", "c", "d"});
    CHECK(m.weighted_recall == doctest::Approx(cm.trace() / cm.total()).epsilon(1e-12));
  }
}

TEST_CASE("stratified folds partition and balance") {
  auto d = synth_bridges({997, 2, 0.1});
  auto folds = stratified_folds(d, 10, 3);
  REQUIRE(folds.size() == 10);
  std::vector<int> seen(d.size(), 0);
  for (const auto& f : folds)
    for (auto i : f) seen[i]++;
  CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  for (std::size_t c = 0; c < d.schema().num_classes(); ++c) {
    std::size_t lo = d.size(), hi = 0;
    for (const auto& f : folds) {
      std::size_t n = 0;
      for (auto i : f) n += (d.class_of(i) == c);
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    CHECK(hi - lo <= 1);
  }
  CHECK(stratified_folds(d, 10, 3) == folds);
  CHECK(stratified_folds(d, 10, 4) != folds);
  CHECK_THROWS_AS(stratified_folds(d, 1, 3), ConfigError);
  CHECK_THROWS_AS(stratified_folds(d, d.size() + 1, 3), ConfigError);
}

TEST_CASE("cross validation is deterministic and covers every instance") {
  auto d = synth_bridges({800, 5, 0.1});
  auto va = partition_by(d, "state").parts.at("VA");
  auto spec = ClassifierSpec::parse("dtree");
  auto a = cross_validate(va, spec, {5, 9});
  auto b = cross_validate(va, spec, {5, 9});
  CHECK(a.confusion == b.confusion);
  CHECK(a.confusion.total() == doctest::Approx(double(va.size())));
  CHECK(a.folds == 5);
  CHECK(a.protocol == "cv5");
}

TEST_CASE("resample target and frequencies") {
  CHECK(resample_target(0.1, 0.3, 4) == doctest::Approx(0.7 * 0.1 + 0.3 / 4));
  CHECK(resample_target(0.1, 0.3, 4) == doctest::Approx(0.145));
  CHECK(resample_target(0.534, 0.3, 4) == doctest::Approx(0.4488));
  CHECK(resample_target(0.534, 0.0, 4) == doctest::Approx(0.534));

  auto d = synth_bridges({1000, 6, 0.1});
  auto r = resample(d, 1.0, 1000.0, 3);
  CHECK(r.size() == 10000);
  auto counts = r.class_counts();
  auto orig = d.class_counts();
  std::size_t present = std::count_if(orig.begin(), orig.end(), [](double v) { return v > 0; });
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (orig[c] > 0) CHECK(counts[c] / r.size() == doctest::Approx(1.0 / present).epsilon(0.02 * present));
  CHECK(resample(d, 0.5, 100, 3).instances() == resample(d, 0.5, 100, 3).instances());
  CHECK_THROWS_AS(resample(d, 1.5), ConfigError);
  CHECK_THROWS_AS(resample(d, 0.5, 0.0), ConfigError);
}

TEST_CASE("summaries use the sample standard deviation") {
  EvalReport a, b, c;
  a.metrics.weighted_recall = 0.8;
  b.metrics.weighted_recall = 0.9;
  c.metrics.weighted_recall = 1.0;
  auto s = summarize({&a, &b, &c});
  CHECK(s.n == 3);
  CHECK(s.mean_recall == doctest::Approx(90.0));
  CHECK(s.sd_recall == doctest::Approx(10.0));
}

TEST_CASE("hold one state out") {
  auto d = synth_bridges({1500, 7, 0.1});
  auto r = hold_one_state_out(d, ClassifierSpec::parse("oner"));
  CHECK(r.per_state.size() == kSynthStates.size());
  auto parts = partition_by(d, "state").parts;
  for (const auto& [state, rep] : r.per_state) {
    CHECK(rep.protocol == "holdout:" + state);
    CHECK(rep.confusion.total() == doctest::Approx(double(parts.at(state).size())));
  }
  CHECK_THROWS_AS(hold_one_state_out(d, ClassifierSpec::parse("oner"), "max_span"), ConfigError);
}

TEST_CASE("per-state cv skips tiny states") {
  auto d = synth_bridges({1000, 8, 0.1});
  std::vector<Instance> rows = d.instances();
  const auto state = d.schema().index("state");
  std::size_t kept_ga = 0;
  std::vector<Instance> out;
  for (const auto& x : rows) {
    if (d.schema()[state].values[std::size_t(x.values[state])] == "GA" && kept_ga++ >= 5) continue;
    out.push_back(x);
  }
  auto r = per_state_cv(Dataset(d.schema(), out), ClassifierSpec::parse("oner"), "state", {10, 1});
  CHECK(r.per_state.count("GA") == 0);
  CHECK(r.per_state.size() == 4);
  CHECK_FALSE(r.notes.empty());
}

TEST_CASE("pearson and external correlation") {
  CHECK(*pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(*pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}));

  auto ct = parse_climate_table("state,temp,humidity,rain,snow\nA,10,50,30,5\nB,12,55,28,4\nC,15,60,40,0\nD,9,40,20,9\n");
  std::map<std::string, double> rec{{"A", 0.8}, {"B", 0.82}, {"C", 0.9}, {"Z", 0.5}};
  auto c = correlate_external(rec, ct);
  CHECK(c.states == std::vector<std::string>{"A", "B", "C"});
  CHECK(c.r.at("temperature").has_value());
  std::map<std::string, double> two{{"A", 0.8}, {"B", 0.82}};
  CHECK_THROWS_AS(correlate_external(two, ct), DataError);
}
