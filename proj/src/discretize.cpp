#include "bridgeml/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bridgeml/entropy.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

double entropy_or_zero(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < -1e-9) throw ConfigError("negative count in entropy");
    if (c > 0) total += c;
  }
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

double entropy(std::span<const double> counts) {
  bool any = std::any_of(counts.begin(), counts.end(), [](double c) { return c > 0; });
  if (!any) throw ConfigError("entropy of an all-zero count vector");
  return entropy_or_zero(counts);
}

std::size_t Discretization::bin_of(double v) const {
  return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

std::vector<std::string> Discretization::labels() const {
  if (cuts.empty()) return {"all"};
  // Short labels unless two cuts print the same at six digits.
  auto fmt = format_display;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (format_display(cuts[i - 1]) == format_display(cuts[i])) fmt = format_double;
  std::vector<std::string> out;
  out.push_back("(-inf-" + fmt(cuts.front()) + "]");
  for (std::size_t i = 1; i < cuts.size(); ++i) out.push_back("(" + fmt(cuts[i - 1]) + "-" + fmt(cuts[i]) + "]");
  out.push_back("(" + fmt(cuts.back()) + "-inf)");
  return out;
}

namespace {

std::size_t nonzero(std::span<const double> counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
}

void mdl_split(std::span<const LabeledValue> v, std::size_t num_classes, std::vector<double>& cuts) {
  if (v.size() < 2) return;
  std::vector<double> total(num_classes, 0.0);
  for (const auto& x : v) total[x.cls] += x.weight;
  double n = 0.0;
  for (double c : total) n += c;
  if (n <= 1.0) return;

  std::vector<double> left(num_classes, 0.0), right;
  std::vector<double> best_left, best_right;
  double wl = 0.0;
  double best_e = std::numeric_limits<double>::infinity();
  std::size_t best_i = v.size();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    left[v[i].cls] += v[i].weight;
    wl += v[i].weight;
    if (!(v[i].value < v[i + 1].value)) continue;
    right = total;
    for (std::size_t c = 0; c < num_classes; ++c) {
      right[c] -= left[c];
      if (right[c] < 1e-9) right[c] = 0.0;
    }
    const double wr = n - wl;
    const double e = (wl * entropy_or_zero(left) + wr * entropy_or_zero(right)) / n;
    if (e < best_e) {
      best_e = e;
      best_i = i;
      best_left = left;
      best_right = right;
    }
  }
  if (best_i == v.size()) return;

  const double hs = entropy_or_zero(total);
  const double gain = hs - best_e;
  const auto k = static_cast<double>(nonzero(total));
  const auto k1 = static_cast<double>(nonzero(best_left));
  const auto k2 = static_cast<double>(nonzero(best_right));
  const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                       (k * hs - k1 * entropy_or_zero(best_left) - k2 * entropy_or_zero(best_right));
  if (!(gain > (std::log2(n - 1.0) + delta) / n)) return;

  double cut = (v[best_i].value + v[best_i + 1].value) / 2.0;
  if (!(cut < v[best_i + 1].value)) cut = v[best_i].value;
  mdl_split(v.subspan(0, best_i + 1), num_classes, cuts);
  cuts.push_back(cut);
  mdl_split(v.subspan(best_i + 1), num_classes, cuts);
}

}  // namespace

std::vector<double> mdl_cut_points(std::vector<LabeledValue> values, std::size_t num_classes) {
  std::stable_sort(values.begin(), values.end(),
                   [](const LabeledValue& a, const LabeledValue& b) { return a.value < b.value; });
  std::vector<double> cuts;
  mdl_split(values, num_classes, cuts);
  return cuts;
}

std::vector<double> equal_frequency_cut_points(std::vector<double> values, std::size_t bins) {
  std::vector<double> cuts;
  if (values.empty() || bins < 2) return cuts;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  for (std::size_t b = 1; b < bins; ++b) {
    std::size_t pos = b * n / bins;
    if (pos == 0 || pos >= n) continue;
    if (!(values[pos - 1] < values[pos])) continue;
    double cut = (values[pos - 1] + values[pos]) / 2.0;
    if (!(cut < values[pos])) cut = values[pos - 1];
    if (cuts.empty() || cuts.back() < cut) cuts.push_back(cut);
  }
  return cuts;
}

Discretization fit_discretization(const Dataset& d, std::size_t attr, BinningMethod method,
                                  std::size_t bins) {
  const auto& a = d.schema()[attr];
  if (!a.is_numeric()) throw ConfigError("attribute '" + a.name + "' is not numeric");
  const auto ci = d.schema().class_index();
  Discretization disc;
  if (method == BinningMethod::mdl) {
    std::vector<LabeledValue> vals;
    for (const auto& x : d.instances()) {
      const double v = x.values[attr], c = x.values[ci];
      if (is_missing(v) || is_missing(c)) continue;
      vals.push_back({v, static_cast<std::size_t>(c), x.weight});
    }
    disc.cuts = mdl_cut_points(std::move(vals), d.schema().num_classes());
  } else {
    std::vector<double> vals;
    for (const auto& x : d.instances())
      if (!is_missing(x.values[attr])) vals.push_back(x.values[attr]);
    disc.cuts = equal_frequency_cut_points(std::move(vals), bins);
  }
  return disc;
}

Dataset apply_discretization(const Dataset& d, std::size_t attr, const Discretization& disc) {
  auto attrs = d.schema().attributes();
  auto& a = attrs.at(attr);
  if (!a.is_numeric()) throw ConfigError("attribute '" + a.name + "' is not numeric");
  a.kind = AttrKind::nominal;
  a.values = disc.labels();
  std::vector<Instance> rows = d.instances();
  for (auto& x : rows) {
    double& v = x.values[attr];
    if (!is_missing(v)) v = static_cast<double>(disc.bin_of(v));
  }
  return Dataset(Schema(std::move(attrs)), std::move(rows));
}

Dataset discretize(const Dataset& d, std::string_view attr, BinningMethod method, std::size_t bins) {
  const auto idx = d.schema().index(attr);
  const auto& a = d.schema()[idx];
  if (!a.is_numeric()) throw ConfigError("attribute '" + a.name + "' is not numeric");
  bool any = std::any_of(d.instances().begin(), d.instances().end(),
                         [idx](const Instance& x) { return !is_missing(x.values[idx]); });
  if (!any) throw DataError("attribute '" + a.name + "' has no known values");
  return apply_discretization(d, idx, fit_discretization(d, idx, method, bins));
}

}  // namespace bridgeml
