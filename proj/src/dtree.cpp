#include "bridgeml/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "bridgeml/entropy.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/serial.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

DTreeOptions DTreeOptions::from_spec(const ClassifierSpec& spec) {
  DTreeOptions o;
  o.confidence = spec.get_double("confidence", o.confidence);
  o.min_objects = static_cast<double>(spec.get_int("min_objects", static_cast<long long>(o.min_objects)));
  o.subtree_raising = spec.get_bool("subtree_raising", o.subtree_raising);
  o.reduced_error = spec.get_bool("reduced_error", o.reduced_error);
  o.folds = static_cast<int>(spec.get_int("folds", o.folds));
  o.unpruned = spec.get_bool("unpruned", o.unpruned);
  o.seed = spec.seed;
  o.validate();
  return o;
}

void DTreeOptions::validate() const {
  if (!(confidence > 0.0 && confidence <= 0.5))
    throw ConfigError("confidence must lie in (0, 0.5], got " + format_double(confidence));
  if (min_objects < 1) throw ConfigError("min_objects must be at least 1");
  if (reduced_error && folds < 2) throw ConfigError("reduced-error pruning needs at least 2 folds");
}

std::size_t TreeNode::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::size_t TreeNode::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

double pessimistic_extra_errors(double n, double e, double confidence) {
  if (confidence > 0.5) return 0.0;
  if (n <= 0) return 0.0;
  if (e < 1.0) {
    const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
    if (e == 0.0) return base;
    return base + e * (pessimistic_extra_errors(n, 1.0, confidence) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - confidence);
  const double f = (e + 0.5) / n;
  const double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
  return r * n - e;
}

namespace {

struct Item {
  std::size_t row;
  double w;
};

using Items = std::vector<Item>;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::size_t majority(const std::vector<double>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

double misclassified(const std::vector<double>& counts) {
  if (counts.empty()) return 0.0;
  return sum(counts) - counts[majority(counts)];
}

// Child index for a known value, or nullopt when the value is MISSING or has no branch.
std::optional<std::size_t> route(const TreeNode& n, double v, bool numeric) {
  if (is_missing(v)) return std::nullopt;
  if (numeric) return v <= n.threshold ? 0 : 1;
  for (std::size_t i = 0; i < n.branch_values.size(); ++i)
    if (static_cast<double>(n.branch_values[i]) == v) return i;
  return std::nullopt;
}

class Builder {
 public:
  Builder(const Dataset& d, const DTreeOptions& o)
      : d_(d), opts_(o), ci_(d.schema().class_index()), nc_(d.schema().num_classes()),
        features_(d.schema().feature_indices()) {}

  std::vector<double> counts(const Items& items) const {
    std::vector<double> c(nc_, 0.0);
    for (const auto& it : items) c[static_cast<std::size_t>(d_[it.row].values[ci_])] += it.w;
    return c;
  }

  std::vector<Items> split_items(const TreeNode& n, const Items& items) const {
    std::vector<Items> out(n.children.size());
    const bool numeric = d_.schema()[static_cast<std::size_t>(n.attribute)].is_numeric();
    for (const auto& it : items) {
      auto b = route(n, d_[it.row].values[static_cast<std::size_t>(n.attribute)], numeric);
      if (b) {
        out[*b].push_back(it);
      } else {
        for (std::size_t c = 0; c < out.size(); ++c)
          if (n.branch_weights[c] > 0) out[c].push_back({it.row, it.w * n.branch_weights[c]});
      }
    }
    return out;
  }

  TreeNode grow(const Items& items) const {
    TreeNode node;
    node.counts = counts(items);
    const double total = sum(node.counts);
    const auto nonzero = std::count_if(node.counts.begin(), node.counts.end(), [](double c) { return c > 0; });
    if (nonzero <= 1 || total < 2 * opts_.min_objects) return node;

    auto candidates = [&](bool allow_zero) {
      std::vector<Candidate> out;
      for (auto attr : features_) {
        auto c = d_.schema()[attr].is_numeric() ? numeric_split(items, attr, total, allow_zero)
                                                : nominal_split(items, attr, total, allow_zero);
        if (c) out.push_back(std::move(*c));
      }
      return out;
    };
    auto cands = candidates(false);
    // An unpruned tree keeps splitting impure nodes even when no single attribute has gain
    // (XOR-like subsets), so consistent data is always fitted exactly.
    if (cands.empty() && opts_.unpruned) cands = candidates(true);
    if (cands.empty()) return node;
    double avg = 0.0;
    for (const auto& c : cands) avg += c.gain;
    avg /= static_cast<double>(cands.size());
    const Candidate* best = nullptr;
    for (const auto& c : cands) {
      if (c.gain < avg - 1e-3 || !(c.split_info > 0)) continue;
      if (!best || c.gain / c.split_info > best->gain / best->split_info) best = &c;
    }
    if (!best) return node;

    node.attribute = static_cast<int>(best->attribute);
    node.threshold = best->threshold;
    node.branch_values = best->branch_values;
    const double known = sum(best->branch_known);
    for (double w : best->branch_known) node.branch_weights.push_back(w / known);
    node.children.resize(best->branch_known.size());
    auto parts = split_items(node, items);
    for (std::size_t c = 0; c < parts.size(); ++c) node.children[c] = grow(parts[c]);
    return node;
  }

  void collapse(TreeNode& n) const {
    if (n.is_leaf()) return;
    if (training_errors(n) >= misclassified(n.counts) - 1e-3) {
      make_leaf(n);
      return;
    }
    for (auto& c : n.children) collapse(c);
  }

  void prune(TreeNode& n, const Items& items, double cf, bool raising) const {
    if (n.is_leaf()) return;
    auto parts = split_items(n, items);
    for (std::size_t c = 0; c < n.children.size(); ++c) prune(n.children[c], parts[c], cf, raising);

    std::size_t largest = 0;
    std::vector<double> bag(n.children.size(), 0.0);
    for (std::size_t c = 0; c < parts.size(); ++c)
      for (const auto& it : parts[c]) bag[c] += it.w;
    largest = majority(bag);

    const double err_largest = raising ? branch_errors(n.children[largest], items, cf)
                                       : std::numeric_limits<double>::max();
    const double err_leaf = distribution_errors(n.counts, cf);
    const double err_tree = estimated_errors(n, cf);
    if (err_leaf <= err_tree + 0.1 && err_leaf <= err_largest + 0.1) {
      make_leaf(n);
      return;
    }
    if (err_largest <= err_tree + 0.1) {
      TreeNode raised = std::move(n.children[largest]);
      n = std::move(raised);
      reset_counts(n, items);
      prune(n, items, cf, raising);
    }
  }

  // Reduced-error pruning against held-out items.
  void prune_reduced_error(TreeNode& n, const Items& holdout) const {
    if (n.is_leaf()) return;
    auto parts = split_items(n, holdout);
    for (std::size_t c = 0; c < n.children.size(); ++c) prune_reduced_error(n.children[c], parts[c]);
    const double leaf_err = holdout_errors_as_leaf(n, holdout);
    const double tree_err = holdout_errors(n, holdout);
    if (leaf_err <= tree_err) make_leaf(n);
  }

  void reset_counts(TreeNode& n, const Items& items) const {
    n.counts = counts(items);
    if (n.is_leaf()) return;
    const auto attr = static_cast<std::size_t>(n.attribute);
    const bool numeric = d_.schema()[attr].is_numeric();
    std::vector<double> known(n.children.size(), 0.0);
    for (const auto& it : items) {
      auto b = route(n, d_[it.row].values[attr], numeric);
      if (b) known[*b] += it.w;
    }
    const double k = sum(known);
    if (k > 0)
      for (std::size_t c = 0; c < known.size(); ++c) n.branch_weights[c] = known[c] / k;
    auto parts = split_items(n, items);
    for (std::size_t c = 0; c < n.children.size(); ++c) reset_counts(n.children[c], parts[c]);
  }

 private:
  struct Candidate {
    std::size_t attribute = 0;
    double gain = 0.0;
    double split_info = 0.0;
    double threshold = 0.0;
    std::vector<std::size_t> branch_values;
    std::vector<double> branch_known;
  };

  static void make_leaf(TreeNode& n) {
    n.children.clear();
    n.attribute = -1;
    n.threshold = 0.0;
    n.branch_values.clear();
    n.branch_weights.clear();
  }

  double training_errors(const TreeNode& n) const {
    if (n.is_leaf()) return misclassified(n.counts);
    double e = 0.0;
    for (const auto& c : n.children) e += training_errors(c);
    return e;
  }

  static double distribution_errors(const std::vector<double>& counts, double cf) {
    const double total = sum(counts);
    if (total <= 0) return 0.0;
    const double wrong = misclassified(counts);
    return wrong + pessimistic_extra_errors(total, wrong, cf);
  }

  double estimated_errors(const TreeNode& n, double cf) const {
    if (n.is_leaf()) return distribution_errors(n.counts, cf);
    double e = 0.0;
    for (const auto& c : n.children) e += estimated_errors(c, cf);
    return e;
  }

  double branch_errors(const TreeNode& n, const Items& items, double cf) const {
    if (n.is_leaf()) return distribution_errors(counts(items), cf);
    auto parts = split_items(n, items);
    double e = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c) e += branch_errors(n.children[c], parts[c], cf);
    return e;
  }

  double holdout_errors_as_leaf(const TreeNode& n, const Items& items) const {
    const auto predicted = majority(n.counts);
    double e = 0.0;
    for (const auto& it : items)
      if (static_cast<std::size_t>(d_[it.row].values[ci_]) != predicted) e += it.w;
    return e;
  }

  double holdout_errors(const TreeNode& n, const Items& items) const {
    if (n.is_leaf()) return holdout_errors_as_leaf(n, items);
    auto parts = split_items(n, items);
    double e = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c) e += holdout_errors(n.children[c], parts[c]);
    return e;
  }

  // Info gain of the known part scaled by the known fraction, C4.5 style.
  static double scaled_gain(const std::vector<double>& known_counts, const std::vector<std::vector<double>>& branches,
                            double known, double total) {
    double after = 0.0;
    for (const auto& b : branches) after += sum(b) * entropy_or_zero(b);
    return known / total * (entropy_or_zero(known_counts) - after / known);
  }

  std::optional<Candidate> nominal_split(const Items& items, std::size_t attr, double total, bool allow_zero) const {
    const auto& a = d_.schema()[attr];
    std::vector<std::vector<double>> per_value(a.arity(), std::vector<double>(nc_, 0.0));
    std::vector<double> weight(a.arity(), 0.0);
    for (const auto& it : items) {
      const double v = d_[it.row].values[attr];
      if (is_missing(v)) continue;
      const auto vi = static_cast<std::size_t>(v);
      per_value[vi][static_cast<std::size_t>(d_[it.row].values[ci_])] += it.w;
      weight[vi] += it.w;
    }
    // Values too rare for their own branch are routed like MISSING.
    Candidate c;
    c.attribute = attr;
    std::vector<std::vector<double>> branches;
    std::vector<double> known_counts(nc_, 0.0);
    for (std::size_t v = 0; v < a.arity(); ++v) {
      if (weight[v] < opts_.min_objects || weight[v] <= 0) continue;
      c.branch_values.push_back(v);
      c.branch_known.push_back(weight[v]);
      branches.push_back(per_value[v]);
      for (std::size_t k = 0; k < nc_; ++k) known_counts[k] += per_value[v][k];
    }
    if (branches.size() < 2) return std::nullopt;
    const double known = sum(c.branch_known);
    c.gain = scaled_gain(known_counts, branches, known, total);
    if (!(c.gain > 1e-10) && !allow_zero) return std::nullopt;
    auto parts = c.branch_known;
    parts.push_back(total - known);
    c.split_info = entropy_or_zero(parts);
    return c;
  }

  std::optional<Candidate> numeric_split(const Items& items, std::size_t attr, double total, bool allow_zero) const {
    std::vector<std::pair<double, Item>> known;
    known.reserve(items.size());
    std::vector<double> known_counts(nc_, 0.0);
    for (const auto& it : items) {
      const double v = d_[it.row].values[attr];
      if (is_missing(v)) continue;
      known.emplace_back(v, it);
      known_counts[static_cast<std::size_t>(d_[it.row].values[ci_])] += it.w;
    }
    const double known_w = sum(known_counts);
    double min_split = 0.1 * known_w / static_cast<double>(nc_);
    if (min_split <= opts_.min_objects) min_split = opts_.min_objects;
    else if (min_split > 25) min_split = 25;
    if (known.size() < 2 || known_w < 2 * min_split) return std::nullopt;
    std::stable_sort(known.begin(), known.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<double> left(nc_, 0.0), right(nc_);
    double wl = 0.0;
    double best_gain = -1.0;
    std::size_t best_i = known.size();
    const double h_known = entropy_or_zero(known_counts);
    for (std::size_t i = 0; i + 1 < known.size(); ++i) {
      const auto& it = known[i].second;
      left[static_cast<std::size_t>(d_[it.row].values[ci_])] += it.w;
      wl += it.w;
      if (!(known[i].first < known[i + 1].first)) continue;
      const double wr = known_w - wl;
      if (wl < min_split || wr < min_split) continue;
      for (std::size_t k = 0; k < nc_; ++k) { right[k] = known_counts[k] - left[k]; if (right[k] < 1e-9) right[k] = 0.0; }
      const double g = h_known - (wl * entropy_or_zero(left) + wr * entropy_or_zero(right)) / known_w;
      if (g > best_gain + 1e-12) {
        best_gain = g;
        best_i = i;
      }
    }
    if (best_i == known.size()) return std::nullopt;
    Candidate c;
    c.attribute = attr;
    c.gain = known_w / total * best_gain;
    if (!(c.gain > 1e-10) && !allow_zero) return std::nullopt;
    const double lo = known[best_i].first, hi = known[best_i + 1].first;
    c.threshold = (lo + hi) / 2.0;
    if (!(c.threshold < hi)) c.threshold = lo;
    double wleft = 0.0;
    for (std::size_t i = 0; i <= best_i; ++i) wleft += known[i].second.w;
    c.branch_known = {wleft, known_w - wleft};
    c.split_info = entropy_or_zero(std::vector<double>{wleft, known_w - wleft, total - known_w});
    return c;
  }

  const Dataset& d_;
  DTreeOptions opts_;
  std::size_t ci_;
  std::size_t nc_;
  std::vector<std::size_t> features_;
};

Items all_items(const Dataset& d) {
  Items items;
  items.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.class_of(i)) items.push_back({i, d[i].weight});
  return items;
}

void mix_distribution(const TreeNode& n, const Schema& s, const Instance& x, double w, std::vector<double>& acc) {
  if (n.is_leaf()) {
    auto p = ClassDistribution::laplace(n.counts).p;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * p[k];
    return;
  }
  const auto attr = static_cast<std::size_t>(n.attribute);
  auto b = route(n, x.values[attr], s[attr].is_numeric());
  if (b) {
    mix_distribution(n.children[*b], s, x, w, acc);
    return;
  }
  for (std::size_t c = 0; c < n.children.size(); ++c)
    if (n.branch_weights[c] > 0) mix_distribution(n.children[c], s, x, w * n.branch_weights[c], acc);
}

std::string branch_test(const TreeNode& n, const Schema& s, std::size_t child) {
  const auto& a = s[static_cast<std::size_t>(n.attribute)];
  if (a.is_numeric()) return (child == 0 ? "<= " : "> ") + format_display(n.threshold);
  return "= " + a.values[n.branch_values[child]];
}

std::string value_text(const Attribute& a, double v) {
  if (is_missing(v)) return "?";
  if (a.is_nominal()) {
    if (v >= 0 && static_cast<std::size_t>(v) < a.arity()) return a.values[static_cast<std::size_t>(v)];
    return "?";
  }
  return format_double(v);
}

void describe_node(const TreeNode& n, const Schema& s, int depth, std::ostream& out) {
  const auto& cls = s.class_attribute();
  for (std::size_t c = 0; c < n.children.size(); ++c) {
    for (int i = 0; i < depth; ++i) out << "|   ";
    out << s[static_cast<std::size_t>(n.attribute)].name << ' ' << branch_test(n, s, c);
    const auto& child = n.children[c];
    if (child.is_leaf()) {
      const double total = sum(child.counts), wrong = misclassified(child.counts);
      out << ": " << cls.values[majority(child.counts)] << " (" << format_double(std::round(total * 100) / 100);
      if (wrong > 0) out << '/' << format_double(std::round(wrong * 100) / 100);
      out << ")\n";
    } else {
      out << '\n';
      describe_node(child, s, depth + 1, out);
    }
  }
}

void write_node(const TreeNode& n, std::ostream& out) {
  out << "node " << n.attribute << ' ' << format_double(n.threshold) << ' ' << n.children.size() << '\n';
  serial::write_vector(out, "counts", n.counts);
  serial::write_indices(out, "values", n.branch_values);
  serial::write_vector(out, "weights", n.branch_weights);
  for (const auto& c : n.children) write_node(c, out);
}

TreeNode read_node(std::istream& in, const Schema& s, int depth) {
  if (depth > 10000) throw DataError("model: tree too deep");
  auto t = serial::read_record(in, "node");
  if (t.size() != 3) throw DataError("model: malformed node record");
  TreeNode n;
  auto attr = parse_int(t[0]);
  auto thr = parse_double(t[1]);
  auto nchild = parse_int(t[2]);
  if (!attr || !thr || !nchild || *nchild < 0) throw DataError("model: malformed node record");
  n.attribute = static_cast<int>(*attr);
  n.threshold = *thr;
  n.counts = serial::read_vector(in, "counts");
  n.branch_values = serial::read_indices(in, "values");
  n.branch_weights = serial::read_vector(in, "weights");
  if (n.counts.size() != s.num_classes()) throw DataError("model: class count mismatch in tree");
  if (*nchild > 0) {
    if (n.attribute < 0 || static_cast<std::size_t>(n.attribute) >= s.size())
      throw DataError("model: split attribute out of range");
    if (n.branch_weights.size() != static_cast<std::size_t>(*nchild))
      throw DataError("model: branch weight count mismatch");
  }
  for (long long c = 0; c < *nchild; ++c) n.children.push_back(read_node(in, s, depth + 1));
  return n;
}

}  // namespace

DecisionTree DecisionTree::grow(const Dataset& d, const DTreeOptions& opts) {
  opts.validate();
  Builder b(d, opts);
  TreeNode root = b.grow(all_items(d));
  b.collapse(root);
  return DecisionTree(d.schema(), std::move(root));
}

DecisionTree DecisionTree::pruned(const Dataset& d, double confidence, bool subtree_raising) const {
  if (!(confidence > 0.0 && confidence <= 0.5)) throw ConfigError("confidence must lie in (0, 0.5]");
  DTreeOptions o;
  Builder b(d, o);
  TreeNode root = root_;
  b.prune(root, all_items(d), confidence, subtree_raising);
  return DecisionTree(schema_, std::move(root));
}

DecisionTree DecisionTree::fit(const Dataset& d, const DTreeOptions& opts) {
  opts.validate();
  if (opts.unpruned) return grow(d, opts);
  if (!opts.reduced_error) return grow(d, opts).pruned(d, opts.confidence, opts.subtree_raising);

  // Hold out one stratified fold for pruning, grow on the rest.
  Items items = all_items(d);
  std::mt19937_64 rng(opts.seed);
  std::shuffle(items.begin(), items.end(), rng);
  std::stable_sort(items.begin(), items.end(), [&d](const Item& a, const Item& b) {
    return d[a.row].values[d.schema().class_index()] < d[b.row].values[d.schema().class_index()];
  });
  Items grow_items, holdout;
  for (std::size_t i = 0; i < items.size(); ++i)
    (static_cast<int>(i % static_cast<std::size_t>(opts.folds)) == opts.folds - 1 ? holdout : grow_items)
        .push_back(items[i]);
  Builder b(d, opts);
  TreeNode root = b.grow(grow_items);
  b.collapse(root);
  b.prune_reduced_error(root, holdout);
  b.reset_counts(root, all_items(d));
  return DecisionTree(d.schema(), std::move(root));
}

ClassDistribution DecisionTree::distribution(const Instance& x) const {
  std::vector<double> acc(schema_.num_classes(), 0.0);
  mix_distribution(root_, schema_, x, 1.0, acc);
  return ClassDistribution::from_weights(std::move(acc));
}

PathExplanation DecisionTree::explain_path(const Instance& x) const {
  PathExplanation out;
  const TreeNode* n = &root_;
  while (!n->is_leaf()) {
    const auto attr = static_cast<std::size_t>(n->attribute);
    const auto& a = schema_[attr];
    PathStep step;
    step.attribute = a.name;
    step.value = value_text(a, x.values[attr]);
    auto b = route(*n, x.values[attr], a.is_numeric());
    if (!b) {
      step.test = "missing";
      for (std::size_t c = 0; c < n->children.size(); ++c)
        step.routing.emplace_back(branch_test(*n, schema_, c), n->branch_weights[c]);
      out.steps.push_back(std::move(step));
      std::vector<double> acc(schema_.num_classes(), 0.0);
      mix_distribution(*n, schema_, x, 1.0, acc);
      out.distribution = ClassDistribution::from_weights(std::move(acc));
      return out;
    }
    step.test = branch_test(*n, schema_, *b);
    out.steps.push_back(std::move(step));
    n = &n->children[*b];
  }
  out.distribution = ClassDistribution::laplace(n->counts);
  return out;
}

std::vector<std::string> DecisionTree::explain_text(const Instance& x) const {
  auto path = explain_path(x);
  std::vector<std::string> lines;
  for (const auto& s : path.steps) {
    if (s.routing.empty()) {
      lines.push_back(s.attribute + " " + s.test + "  (value " + s.value + ")");
    } else {
      std::string r;
      for (const auto& [test, w] : s.routing) r += (r.empty() ? "" : ", ") + test + " @ " + format_display(w);
      lines.push_back(s.attribute + " is " + (s.value == "?" ? "missing" : "unseen (" + s.value + ")") +
                      "; weighted across branches: " + r);
    }
  }
  const auto& cls = schema_.class_attribute();
  lines.push_back("-> " + cls.values[path.distribution.argmax()]);
  return lines;
}

std::string DecisionTree::describe() const {
  std::ostringstream out;
  if (root_.is_leaf()) {
    out << ": " << schema_.class_attribute().values[majority(root_.counts)] << " ("
        << format_double(sum(root_.counts)) << ")\n";
  } else {
    describe_node(root_, schema_, 0, out);
  }
  out << "\nNumber of leaves: " << root_.leaf_count() << "\nSize of the tree: " << root_.node_count() << "\n";
  return out.str();
}

void DecisionTree::write_body(std::ostream& out) const { write_node(root_, out); }

DecisionTree DecisionTree::read_body(std::istream& in, const Schema& schema) {
  return DecisionTree(schema, read_node(in, schema, 0));
}

}  // namespace bridgeml
