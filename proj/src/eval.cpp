#include "bridgeml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != rows.size()) throw ConfigError("confusion matrix must be square");
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (rows[a][p] < 0) throw ConfigError("negative confusion count");
      cm.add(a, p, rows[a][p]);
    }
  }
  return cm;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  if (o.n_ != n_) throw ConfigError("confusion matrix size mismatch");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += o.cells_[i];
  return *this;
}

double ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), 0.0); }

double ConfusionMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

double ConfusionMatrix::row_sum(std::size_t actual) const {
  double s = 0.0;
  for (std::size_t p = 0; p < n_; ++p) s += at(actual, p);
  return s;
}

double ConfusionMatrix::col_sum(std::size_t predicted) const {
  double s = 0.0;
  for (std::size_t a = 0; a < n_; ++a) s += at(a, predicted);
  return s;
}

Metrics precision_recall(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  const double total = cm.total();
  if (cm.classes() == 0 || total <= 0) throw ConfigError("precision/recall of an empty confusion matrix");
  Metrics m;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    ClassMetrics cls;
    cls.cls = c < class_names.size() ? class_names[c] : std::to_string(c);
    cls.support = cm.row_sum(c);
    const double predicted = cm.col_sum(c);
    cls.recall = cls.support > 0 ? cm.at(c, c) / cls.support : 0.0;
    cls.precision = predicted > 0 ? cm.at(c, c) / predicted : 0.0;
    m.weighted_recall += cls.support * cls.recall;
    m.weighted_precision += cls.support * cls.precision;
    m.per_class.push_back(std::move(cls));
  }
  m.weighted_recall /= total;
  m.weighted_precision /= total;
  return m;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("need at least 2 folds");
  if (k > d.size())
    throw ConfigError(std::to_string(k) + " folds requested for " + std::to_string(d.size()) + " instances");
  std::vector<std::vector<std::size_t>> by_class(d.schema().num_classes());
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto c = d.class_of(i);
    if (!c) throw DataError("cross-validation needs a known class on every instance");
    by_class[*c].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ConfusionMatrix test_confusion(const TrainedModel& m, const Dataset& test) {
  ConfusionMatrix cm(test.schema().num_classes());
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto actual = test.class_of(i);
    if (!actual) continue;
    cm.add(*actual, m.predict(test[i]));
  }
  return cm;
}

EvalReport make_report(const Dataset& d, const ClassifierSpec& spec, ConfusionMatrix cm) {
  EvalReport r;
  r.spec = spec.to_string();
  r.seed = spec.seed;
  r.attributes = d.schema().feature_names();
  r.class_names = d.schema().class_attribute().values;
  r.metrics = precision_recall(cm, r.class_names);
  r.confusion = std::move(cm);
  return r;
}

}  // namespace

EvalReport cross_validate(const Dataset& input, const ClassifierSpec& spec, const CvOptions& opts) {
  if (opts.resample_bias && !(*opts.resample_bias >= 0.0 && *opts.resample_bias <= 1.0))
    throw ConfigError("resample bias must lie in [0, 1]");
  Dataset d = input;
  if (opts.resample_bias && opts.resample_whole_dataset)
    d = resample(d, *opts.resample_bias, opts.resample_size_pct, derive_seed(opts.seed, 0xB1A5));
  const auto folds = stratified_folds(d, opts.folds, opts.seed);

  std::vector<std::future<ConfusionMatrix>> jobs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    jobs.push_back(std::async(std::launch::async, [&, f] {
      std::vector<std::size_t> train_rows;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      std::sort(train_rows.begin(), train_rows.end());
      Dataset train = d.subset(train_rows);
      if (opts.resample_bias && !opts.resample_whole_dataset)
        train = resample(train, *opts.resample_bias, opts.resample_size_pct, derive_seed(opts.seed, f));
      auto model = fit(spec, train);
      return test_confusion(model, d.subset(folds[f]));
    }));
  }
  ConfusionMatrix cm(d.schema().num_classes());
  for (auto& j : jobs) cm += j.get();

  auto r = make_report(d, spec, std::move(cm));
  r.protocol = "cv" + std::to_string(opts.folds);
  r.seed = opts.seed;
  r.folds = opts.folds;
  r.bias = opts.resample_bias;
  return r;
}

EvalReport train_test(const Dataset& train, const Dataset& test, const ClassifierSpec& spec) {
  if (train.schema() != test.schema()) throw SchemaMismatch("train and test schemas differ");
  auto model = fit(spec, train);
  auto r = make_report(test, spec, test_confusion(model, test));
  r.protocol = "train-test";
  return r;
}

double resample_target(double class_proportion, double bias, std::size_t classes_present) {
  return (1.0 - bias) * class_proportion + bias / static_cast<double>(classes_present);
}

Dataset resample(const Dataset& d, double bias, double size_pct, std::uint64_t seed) {
  if (d.empty()) throw DataError("cannot resample an empty dataset");
  if (!(bias >= 0.0 && bias <= 1.0)) throw ConfigError("resample bias must lie in [0, 1]");
  if (!(size_pct > 0.0)) throw ConfigError("resample size must be positive");

  std::vector<std::vector<std::size_t>> members(d.schema().num_classes());
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto c = d.class_of(i);
    if (!c) throw DataError("resampling needs a known class on every instance");
    members[*c].push_back(i);
  }
  std::size_t present = 0;
  for (const auto& m : members) present += !m.empty();
  std::vector<double> target(members.size(), 0.0);
  const auto n = static_cast<double>(d.size());
  for (std::size_t c = 0; c < members.size(); ++c)
    if (!members[c].empty())
      target[c] = resample_target(static_cast<double>(members[c].size()) / n, bias, present);

  const auto draws = static_cast<std::size_t>(std::ceil(size_pct * n / 100.0 - 1e-9));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_class(target.begin(), target.end());
  std::vector<Instance> out;
  out.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto& m = members[pick_class(rng)];
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    out.push_back(d[m[pick(rng)]]);
  }
  return d.with_instances(std::move(out));
}

SpreadSummary summarize(const std::vector<const EvalReport*>& reports) {
  SpreadSummary s;
  s.n = reports.size();
  if (reports.empty()) return s;
  std::vector<double> rec, prec;
  for (const auto* r : reports) {
    rec.push_back(100.0 * r->metrics.weighted_recall);
    prec.push_back(100.0 * r->metrics.weighted_precision);
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  auto sd = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  s.mean_recall = mean(rec);
  s.sd_recall = sd(rec);
  s.mean_precision = mean(prec);
  s.sd_precision = sd(prec);
  return s;
}

namespace {

SpreadSummary summarize_map(const std::map<std::string, EvalReport>& m) {
  std::vector<const EvalReport*> ptrs;
  for (const auto& [k, r] : m) ptrs.push_back(&r);
  return summarize(ptrs);
}

}  // namespace

HoldoutResult hold_one_state_out(const Dataset& national, const ClassifierSpec& spec, std::string_view state_attr) {
  const auto si = national.schema().index(state_attr);
  const auto& sa = national.schema()[si];
  if (!sa.is_nominal()) throw ConfigError("state attribute must be nominal");
  Dataset d = with_role(drop_missing_class(national), state_attr, Role::meta);

  HoldoutResult out;
  std::vector<std::vector<std::size_t>> rows(sa.arity());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = d[i].values[si];
    if (!is_missing(v)) rows[static_cast<std::size_t>(v)].push_back(i);
  }
  std::vector<std::pair<std::string, std::future<EvalReport>>> jobs;
  for (std::size_t s = 0; s < sa.arity(); ++s) {
    if (rows[s].empty()) {
      out.notes.push_back("state " + sa.values[s] + " has no instances; skipped");
      continue;
    }
    std::vector<std::size_t> train_rows;
    for (std::size_t t = 0; t < sa.arity(); ++t)
      if (t != s) train_rows.insert(train_rows.end(), rows[t].begin(), rows[t].end());
    if (train_rows.empty()) {
      out.notes.push_back("state " + sa.values[s] + " is the only state; skipped");
      continue;
    }
    std::sort(train_rows.begin(), train_rows.end());
    jobs.emplace_back(sa.values[s], std::async(std::launch::async, [&d, &spec, train_rows, test_rows = rows[s]] {
                        return train_test(d.subset(train_rows), d.subset(test_rows), spec);
                      }));
  }
  for (auto& [state, job] : jobs) {
    auto r = job.get();
    r.protocol = "holdout:" + state;
    out.per_state.emplace(state, std::move(r));
  }
  out.summary = summarize_map(out.per_state);
  return out;
}

HoldoutResult per_state_cv(const Dataset& national, const ClassifierSpec& spec, std::string_view state_attr,
                           const CvOptions& opts) {
  auto parts = partition_by(drop_missing_class(national), state_attr);
  HoldoutResult out;
  if (parts.rejected) out.notes.push_back(std::to_string(parts.rejected) + " instances with unknown state skipped");
  for (const auto& [state, part] : parts.parts) {
    if (part.size() < opts.folds) {
      out.notes.push_back("state " + state + " has fewer instances than folds; skipped");
      continue;
    }
    auto r = cross_validate(part, spec, opts);
    r.protocol = "cv" + std::to_string(opts.folds) + ":" + state;
    out.per_state.emplace(state, std::move(r));
  }
  out.summary = summarize_map(out.per_state);
  return out;
}

ClimateTable parse_climate_table(std::string_view text) {
  ClimateTable t;
  bool header = true;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 5) throw DataError("climate line " + std::to_string(lineno) + ": expected 5 fields");
    ClimateRow r;
    double* slots[] = {&r.temperature, &r.humidity, &r.rain, &r.snow};
    for (int i = 0; i < 4; ++i) {
      auto v = parse_double(f[static_cast<std::size_t>(i) + 1]);
      if (!v) throw DataError("climate line " + std::to_string(lineno) + ": bad number");
      *slots[i] = *v;
    }
    t[std::string(trim(f[0]))] = r;
  }
  return t;
}

ClimateTable read_climate_table(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : read_lines(path)) text += l + "\n";
  return parse_climate_table(text);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult correlate_external(const std::map<std::string, double>& recall_by_state, const ClimateTable& ct) {
  CorrelationResult out;
  std::vector<double> rec, temp, hum, rain, snow;
  for (const auto& [state, r] : recall_by_state) {
    auto it = ct.find(state);
    if (it == ct.end()) continue;
    if (!std::isfinite(r)) throw DataError("non-finite recall for state " + state);
    out.states.push_back(state);
    rec.push_back(r);
    temp.push_back(it->second.temperature);
    hum.push_back(it->second.humidity);
    rain.push_back(it->second.rain);
    snow.push_back(it->second.snow);
  }
  if (out.states.size() < 3)
    throw DataError("correlation needs at least 3 matched states, found " + std::to_string(out.states.size()));
  out.r["temperature"] = pearson(rec, temp);
  out.r["humidity"] = pearson(rec, hum);
  out.r["rain"] = pearson(rec, rain);
  out.r["snow"] = pearson(rec, snow);
  return out;
}

}  // namespace bridgeml
