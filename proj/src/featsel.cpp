#include "bridgeml/featsel.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <spdlog/spdlog.h>

#include "bridgeml/discretize.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/eval.hpp"

namespace bridgeml {

std::string_view to_string(Metric m) { return m == Metric::info_gain ? "info-gain" : "chi-squared"; }

ContingencyTable ContingencyTable::from_counts(std::vector<std::vector<double>> observed,
                                               std::vector<std::string> row_labels,
                                               std::vector<std::string> col_labels) {
  const std::size_t nr = observed.size();
  const std::size_t nc = nr ? observed.front().size() : 0;
  for (const auto& r : observed)
    if (r.size() != nc) throw ConfigError("ragged contingency table");
  if (row_labels.empty())
    for (std::size_t i = 0; i < nr; ++i) row_labels.push_back(std::to_string(i));
  if (col_labels.empty())
    for (std::size_t j = 0; j < nc; ++j) col_labels.push_back(std::to_string(j));

  std::vector<double> rs(nr, 0.0), cs(nc, 0.0);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      if (observed[i][j] < 0) throw ConfigError("negative count in contingency table");
      rs[i] += observed[i][j];
      cs[j] += observed[i][j];
    }
  ContingencyTable t;
  for (std::size_t j = 0; j < nc; ++j)
    if (cs[j] > 0) t.col_labels.push_back(col_labels[j]);
  for (std::size_t i = 0; i < nr; ++i) {
    if (rs[i] <= 0) continue;
    t.row_labels.push_back(row_labels[i]);
    std::vector<double> row;
    for (std::size_t j = 0; j < nc; ++j)
      if (cs[j] > 0) row.push_back(observed[i][j]);
    t.observed.push_back(std::move(row));
  }
  return t;
}

double ContingencyTable::grand_total() const {
  double g = 0.0;
  for (const auto& r : observed)
    for (double v : r) g += v;
  return g;
}

std::vector<std::vector<double>> ContingencyTable::expected() const {
  const auto nr = rows(), nc = cols();
  std::vector<double> rs(nr, 0.0), cs(nc, 0.0);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      rs[i] += observed[i][j];
      cs[j] += observed[i][j];
    }
  const double g = grand_total();
  std::vector<std::vector<double>> e(nr, std::vector<double>(nc, 0.0));
  if (g <= 0) return e;
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) e[i][j] = rs[i] * cs[j] / g;
  return e;
}

namespace {

// Nominal view of one column: category index per instance (or MISSING) plus labels.
struct NominalColumn {
  std::vector<double> values;
  std::vector<std::string> labels;
};

NominalColumn nominal_column(const Dataset& d, std::size_t attr) {
  const auto& a = d.schema()[attr];
  NominalColumn col;
  col.values.reserve(d.size());
  if (a.is_nominal()) {
    col.labels = a.values;
    for (const auto& x : d.instances()) col.values.push_back(x.values[attr]);
    return col;
  }
  auto disc = fit_discretization(d, attr);
  col.labels = disc.labels();
  for (const auto& x : d.instances()) {
    const double v = x.values[attr];
    col.values.push_back(is_missing(v) ? kMissing : static_cast<double>(disc.bin_of(v)));
  }
  return col;
}

}  // namespace

ContingencyTable contingency_table(const Dataset& d, std::string_view attr) {
  const auto idx = d.schema().index(attr);
  const auto ci = d.schema().class_index();
  auto col = nominal_column(d, idx);
  std::vector<std::vector<double>> obs(col.labels.size(), std::vector<double>(d.schema().num_classes(), 0.0));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = col.values[i], c = d[i].values[ci];
    if (is_missing(v) || is_missing(c)) continue;
    obs[static_cast<std::size_t>(v)][static_cast<std::size_t>(c)] += d[i].weight;
  }
  return ContingencyTable::from_counts(std::move(obs), col.labels, d.schema().class_attribute().values);
}

double chi_squared(const ContingencyTable& t) {
  if (t.degenerate()) {
    spdlog::warn("chi-squared: degenerate {}x{} table scores 0", t.rows(), t.cols());
    return 0.0;
  }
  const auto e = t.expected();
  double x2 = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double diff = t.observed[i][j] - e[i][j];
      x2 += diff * diff / e[i][j];
    }
  return x2;
}

double chi_squared(const Dataset& d, std::string_view attr) { return chi_squared(contingency_table(d, attr)); }

double info_gain(const Dataset& d, std::string_view attr) {
  const auto idx = d.schema().index(attr);
  const auto ci = d.schema().class_index();
  const auto nc = d.schema().num_classes();
  auto col = nominal_column(d, idx);
  // Last row collects MISSING attribute values.
  std::vector<std::vector<double>> branch(col.labels.size() + 1, std::vector<double>(nc, 0.0));
  std::vector<double> cls(nc, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double c = d[i].values[ci];
    if (is_missing(c)) continue;
    const auto k = static_cast<std::size_t>(c);
    const double v = col.values[i];
    const std::size_t b = is_missing(v) ? col.labels.size() : static_cast<std::size_t>(v);
    branch[b][k] += d[i].weight;
    cls[k] += d[i].weight;
    total += d[i].weight;
  }
  if (total <= 0) return 0.0;
  double after = 0.0;
  for (const auto& b : branch) {
    double w = 0.0;
    for (double v : b) w += v;
    if (w > 0) after += w / total * entropy_or_zero(b);
  }
  return std::max(0.0, entropy_or_zero(cls) - after);
}

std::vector<AttributeScore> apply_cutoff(std::vector<AttributeScore> scores, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("cutoff ratio must lie in (0, 1]");
  std::sort(scores.begin(), scores.end(), [](const AttributeScore& a, const AttributeScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.attribute < b.attribute;
  });
  bool dropping = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i >= 2 && !dropping && scores[i].score < ratio * scores[i - 1].score) dropping = true;
    scores[i].kept = !dropping;
  }
  return scores;
}

std::vector<AttributeScore> rank_attributes(const Dataset& d, Metric metric, double ratio) {
  const auto features = d.schema().feature_indices();
  if (features.empty()) throw ConfigError("no features to rank");
  std::vector<AttributeScore> scores;
  for (auto f : features) {
    const auto& name = d.schema()[f].name;
    const double s = metric == Metric::info_gain ? info_gain(d, name) : chi_squared(d, name);
    scores.push_back({name, s, metric, true});
  }
  return apply_cutoff(std::move(scores), ratio);
}

LooResult leave_one_out_selection(const Dataset& data, const ClassifierSpec& spec, double threshold_points,
                                  std::size_t folds, std::uint64_t seed) {
  Dataset d = drop_missing_class(data);
  if (d.empty()) throw DataError("leave-one-attribute-out on an empty dataset");
  if (folds < 2) throw ConfigError("need at least 2 folds");
  if (d.size() < folds * 10) {
    spdlog::warn("leave-one-attribute-out: {} instances is too few for {}-fold CV; using leave-one-out CV",
                 d.size(), folds);
    folds = d.size();
  }
  CvOptions cv;
  cv.folds = folds;
  cv.seed = seed;

  const auto features = d.schema().feature_names();
  auto base = cross_validate(d, spec, cv);

  std::vector<std::future<EvalReport>> jobs;
  for (const auto& f : features) {
    jobs.push_back(std::async(std::launch::async, [&, f] {
      return cross_validate(with_role(d, f, Role::meta), spec, cv);
    }));
  }
  LooResult out;
  out.folds = folds;
  out.baseline_recall = 100.0 * base.metrics.weighted_recall;
  out.baseline_precision = 100.0 * base.metrics.weighted_precision;
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto r = jobs[i].get();
    LooImpact imp;
    imp.attribute = features[i];
    imp.recall_drop = out.baseline_recall - 100.0 * r.metrics.weighted_recall;
    imp.precision_drop = out.baseline_precision - 100.0 * r.metrics.weighted_precision;
    imp.essential = imp.recall_drop > threshold_points;
    if (imp.essential) out.essential.push_back(imp.attribute);
    out.impacts.push_back(std::move(imp));
  }
  return out;
}

std::vector<std::string> combine_selections(const std::vector<AttributeScore>& ranked, const LooResult& loo) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : ranked)
    if (s.kept && seen.insert(s.attribute).second) out.push_back(s.attribute);
  for (const auto& e : loo.essential)
    if (seen.insert(e).second) out.push_back(e);
  return out;
}

}  // namespace bridgeml
