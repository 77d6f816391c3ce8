#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bridgeml/bayesnet.hpp"
#include "bridgeml/dtree.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/oner.hpp"
#include "bridgeml/synth.hpp"
#include "helpers.hpp"

using namespace bridgeml;

namespace {

Instance row(const Schema& s, std::vector<std::string> labels) {
  Instance x;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == "?") x.values.push_back(kMissing);
    else x.values.push_back(static_cast<double>(*s[i].index_of(labels[i])));
  }
  while (x.values.size() < s.size()) x.values.push_back(kMissing);
  return x;
}

std::string label(const Schema& s, std::size_t c) { return s.class_attribute().values[c]; }

}  // namespace

TEST_CASE("spec parsing") {
  auto s = ClassifierSpec::parse("bayesnet:max_parents=3,alpha=1");
  CHECK(s.kind == ModelKind::bayesnet);
  CHECK(s.get_int("max_parents", 2) == 3);
  CHECK(ClassifierSpec::parse(s.to_string()) == s);
  CHECK_THROWS_AS(ClassifierSpec::parse("forest"), ConfigError);
  CHECK_THROWS_AS(ClassifierSpec::parse("dtree:max_parents=2").validate(), ConfigError);
  CHECK_THROWS_AS(ClassifierSpec::parse("dtree:confidence=0.9").validate(), ConfigError);
  CHECK_THROWS_AS(ClassifierSpec::parse("bayesnet:alpha=-1").validate(), ConfigError);
  CHECK_THROWS_AS(ClassifierSpec::parse("bayesnet:max_parents=0").validate(), ConfigError);
}

TEST_CASE("class distributions") {
  CHECK(ClassDistribution::from_weights({0, 0}).p == std::vector<double>{0.5, 0.5});
  CHECK(ClassDistribution::from_weights({1, 3}).p == std::vector<double>{0.25, 0.75});
  CHECK(ClassDistribution{{0.4, 0.4, 0.2}}.argmax() == 0);
  auto l = ClassDistribution::laplace({3, 0});
  CHECK(l.p[0] == doctest::Approx(0.8));
}

TEST_CASE("OneR on weather") {
  auto w = testing::weather();
  auto m = OneR::fit(w);
  REQUIRE(m.attribute());
  CHECK(w.schema()[*m.attribute()].name == "outlook");
  CHECK(m.training_errors() == doctest::Approx(4.0));
  CHECK(label(w.schema(), m.distribution(row(w.schema(), {"overcast"})).argmax()) == "yes");
  CHECK(label(w.schema(), m.distribution(row(w.schema(), {"sunny"})).argmax()) == "no");
  CHECK_FALSE(m.explain_text(row(w.schema(), {"rainy"})).empty());
}

TEST_CASE("OneR without features predicts the majority") {
  auto w = testing::weather();
  auto only = project(w, std::vector<std::string>{});
  auto m = OneR::fit(only);
  CHECK_FALSE(m.attribute());
  Instance x{{kMissing}};
  CHECK(label(only.schema(), m.distribution(x).argmax()) == "yes");
}

TEST_CASE("decision tree on weather") {
  auto w = testing::weather();
  auto t = DecisionTree::fit(w, DTreeOptions{.min_objects = 1});
  const auto& root = t.root();
  REQUIRE(!root.is_leaf());
  CHECK(w.schema()[root.attribute].name == "outlook");
  const auto& s = w.schema();
  CHECK(label(s, t.distribution(row(s, {"sunny", "hot", "high", "FALSE"})).argmax()) == "no");
  CHECK(label(s, t.distribution(row(s, {"sunny", "hot", "normal", "FALSE"})).argmax()) == "yes");
  CHECK(label(s, t.distribution(row(s, {"overcast", "cool", "high", "TRUE"})).argmax()) == "yes");
  CHECK(label(s, t.distribution(row(s, {"rainy", "mild", "high", "TRUE"})).argmax()) == "no");
  CHECK(label(s, t.distribution(row(s, {"rainy", "mild", "high", "FALSE"})).argmax()) == "yes");

  auto path = t.explain_path(row(s, {"sunny", "mild", "normal", "TRUE"}));
  REQUIRE(path.steps.size() == 2);
  CHECK(path.steps[0].attribute == "outlook");
  CHECK(path.steps[0].test == "= sunny");
  CHECK(path.steps[1].attribute == "humidity");
}

TEST_CASE("decision tree routes MISSING by branch weight") {
  auto w = testing::weather();
  auto t = DecisionTree::fit(w, DTreeOptions{.min_objects = 1});
  auto x = row(w.schema(), {"?", "mild", "high", "FALSE"});
  auto path = t.explain_path(x);
  REQUIRE(!path.steps.empty());
  CHECK(path.steps[0].value == "?");
  double total = 0;
  for (const auto& [test, wgt] : path.steps[0].routing) total += wgt;
  CHECK(path.steps[0].routing.size() == 3);
  CHECK(total == doctest::Approx(1.0));
  double psum = 0;
  for (double p : path.distribution.p) psum += p;
  CHECK(psum == doctest::Approx(1.0));
}

TEST_CASE("decision tree numeric threshold lies between classes") {
  Schema s({Attribute::numeric("x"), Attribute::nominal("c", {"a", "b"}, Role::target)});
  std::vector<Instance> rows;
  for (double v : {1, 2, 3, 4, 5}) rows.push_back({{v, 0}});
  for (double v : {10, 11, 12, 13, 14}) rows.push_back({{v, 1}});
  auto t = DecisionTree::fit(Dataset(s, rows));
  REQUIRE(!t.root().is_leaf());
  CHECK(t.root().threshold >= 5.0);
  CHECK(t.root().threshold < 10.0);
}

TEST_CASE("xor: growth stops without gain unless unpruned") {
  Schema s({Attribute::nominal("a", {"0", "1"}), Attribute::nominal("b", {"0", "1"}),
            Attribute::nominal("c", {"n", "y"}, Role::target)});
  std::vector<Instance> rows;
  for (int k = 0; k < 5; ++k)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) rows.push_back({{double(a), double(b), double(a ^ b)}});
  Dataset d(s, rows);
  CHECK(DecisionTree::fit(d, DTreeOptions{.min_objects = 1}).root().is_leaf());
  auto t = DecisionTree::fit(d, DTreeOptions{.min_objects = 1, .unpruned = true});
  CHECK(t.root().leaf_count() == 4);
  for (const auto& x : d.instances()) CHECK(t.distribution(x).argmax() == std::size_t(x.values.back()));
}

TEST_CASE("pessimistic pruning bound") {
  CHECK(pessimistic_extra_errors(6, 0, 0.25) == doctest::Approx(1.2).epsilon(0.05));
  CHECK(pessimistic_extra_errors(100, 10, 0.25) > 0);
  CHECK(pessimistic_extra_errors(100, 10, 0.1) > pessimistic_extra_errors(100, 10, 0.4));
}

TEST_CASE("unpruned tree fits consistent data") {
  std::mt19937_64 rng(5);
  auto d = testing::random_nominal(rng, 200, 6);
  // Make labels a function of the features so the data is consistent.
  std::vector<Instance> rows;
  for (auto x : d.instances()) {
    x.values.back() = std::fmod(x.values[0] + x.values[1] * x.values[2], d.schema().num_classes());
    rows.push_back(x);
  }
  Dataset cons(d.schema(), rows);
  auto t = DecisionTree::fit(cons, DTreeOptions{.min_objects = 1, .unpruned = true});
  for (const auto& x : cons.instances()) CHECK(t.distribution(x).argmax() == std::size_t(x.values.back()));
}

TEST_CASE("k2 node score matches the closed form") {
  // Oracle: log Cooper-Herskovits with parent configurations enumerated by hand.
  Schema s({Attribute::nominal("a", {"0", "1"}), Attribute::nominal("c", {"x", "y"}, Role::target)});
  std::vector<Instance> rows;
  int counts[2][2] = {{5, 1}, {2, 4}};  // [c][a]
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < counts[c][a]; ++k) rows.push_back({{double(a), double(c)}});
  Dataset d(s, rows);
  auto lf = [](double n) { return std::lgamma(n + 1); };
  double expect = 0;
  for (int c = 0; c < 2; ++c) {
    const double n = counts[c][0] + counts[c][1];
    expect += lf(1) - lf(n + 1) + lf(counts[c][0]) + lf(counts[c][1]);
  }
  std::vector<std::size_t> parents{1};
  CHECK(k2_node_score(d, 0, parents) == doctest::Approx(expect).epsilon(1e-12));
  double none = lf(1) - lf(12 + 1) + lf(7) + lf(5);
  CHECK(k2_node_score(d, 0, std::vector<std::size_t>{}) == doctest::Approx(none).epsilon(1e-12));
}

TEST_CASE("bayes net structure and contributions") {
  auto w = testing::weather();
  auto bn = BayesNet::fit(w);
  const auto& st = bn.structure();
  CHECK(st.is_acyclic());
  CHECK(st.max_parent_count() <= 2);
  for (std::size_t i = 1; i < st.nodes.size(); ++i) {
    CHECK(std::find(st.parents[i].begin(), st.parents[i].end(), 0) != st.parents[i].end());
  }
  auto x = row(w.schema(), {"sunny", "cool", "high", "TRUE"});
  auto table = bn.explain_contributions(x);
  auto composed = table.compose();
  auto direct = bn.distribution(x);
  for (std::size_t c = 0; c < direct.p.size(); ++c) CHECK(composed.p[c] == doctest::Approx(direct.p[c]));

  auto missing = row(w.schema(), {"?", "cool", "?", "TRUE"});
  auto t2 = bn.explain_contributions(missing);
  int skipped = 0;
  for (const auto& r : t2.rows) skipped += r.skipped;
  CHECK(skipped >= 2);
}

TEST_CASE("bayes net cpt indexing") {
  Cpt c;
  c.arity = 2;
  c.parent_arities = {3, 2};
  c.probs.assign(12, 0.5);
  CHECK(c.num_configs() == 6);
  CHECK(c.config_index(std::vector<std::size_t>{2, 1}) == 5);
  CHECK(c.config_index(std::vector<std::size_t>{1, 0}) == 2);
}

TEST_CASE("k2 ordering must be a permutation with the class first") {
  auto w = testing::weather();
  std::vector<std::size_t> bad{0, 1, 2, 3, 4};
  CHECK_THROWS_AS(k2_search(w, bad, 2), ConfigError);
  auto ord = default_k2_ordering(w);
  CHECK(ord.front() == w.schema().class_index());
  CHECK(ord.size() == w.schema().size());
}

TEST_CASE("fit drops class-missing rows and model files round trip") {
  auto d = synth_bridges({1500, 4, 0.1});
  auto wa = partition_by(d, "state").parts.at("WA");
  for (const char* spec : {"dtree", "dtree:confidence=0.2,min_objects=3", "bayesnet", "bayesnet:max_parents=1",
                           "oner"}) {
    CAPTURE(spec);
    auto m = fit(ClassifierSpec::parse(spec), wa);
    m.metadata["state"] = "WA";
    auto text = serialize_model(m);
    std::istringstream in(text);
    auto back = load_model(in);
    CHECK(back.fingerprint() == m.fingerprint());
    CHECK(back.spec() == m.spec());
    CHECK(back.metadata == m.metadata);
    CHECK(serialize_model(back) == text);
    for (std::size_t i = 0; i < wa.size(); i += 7) {
      auto a = m.predict_distribution(wa[i]), b = back.predict_distribution(wa[i]);
      for (std::size_t c = 0; c < a.p.size(); ++c) CHECK(a.p[c] == b.p[c]);
    }
  }
}

TEST_CASE("model loading rejects damaged input") {
  auto w = testing::weather();
  auto m = fit(ClassifierSpec::parse("dtree"), w);
  auto text = serialize_model(m);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(truncated), DataError);
  std::istringstream junk("not a model\n");
  CHECK_THROWS_AS(load_model(junk), DataError);

  Instance short_row{{0, 1}};
  CHECK_THROWS_AS(m.predict_distribution(short_row), SchemaMismatch);
  auto other = Schema({Attribute::numeric("x"), Attribute::nominal("c", {"a"}, Role::target)});
  CHECK_THROWS_AS(m.predict_distribution(w[0], other), SchemaMismatch);
}
