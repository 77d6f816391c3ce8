#include "bridgeml/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bridgeml/errors.hpp"
#include "bridgeml/featsel.hpp"
#include "bridgeml/serial.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

BayesNetOptions BayesNetOptions::from_spec(const ClassifierSpec& spec) {
  BayesNetOptions o;
  o.max_parents = static_cast<int>(spec.get_int("max_parents", o.max_parents));
  o.alpha = spec.get_double("alpha", o.alpha);
  o.validate();
  return o;
}

void BayesNetOptions::validate() const {
  if (max_parents < 1) throw ConfigError("max_parents must be at least 1");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
}

std::size_t NetworkStructure::max_parent_count() const {
  std::size_t m = 0;
  for (const auto& p : parents) m = std::max(m, p.size());
  return m;
}

bool NetworkStructure::is_acyclic() const {
  // Kahn's algorithm over parent -> child arcs.
  const auto n = nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t c = 0; c < n; ++c)
    for (auto p : parents[c]) {
      if (p >= n) return false;
      children[p].push_back(c);
      ++indegree[c];
    }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto v = ready.back();
    ready.pop_back();
    ++visited;
    for (auto c : children[v])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  return visited == n;
}

std::size_t Cpt::num_configs() const {
  std::size_t n = 1;
  for (auto a : parent_arities) n *= a;
  return n;
}

std::size_t Cpt::config_index(std::span<const std::size_t> parent_values) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < parent_arities.size(); ++i) idx = idx * parent_arities[i] + parent_values[i];
  return idx;
}

namespace {

struct FamilyCounts {
  std::size_t arity = 0;
  std::size_t configs = 1;
  std::vector<double> counts;  // configs x arity
};

FamilyCounts family_counts(const Dataset& d, std::size_t node, std::span<const std::size_t> parents) {
  const auto& s = d.schema();
  FamilyCounts fc;
  fc.arity = s[node].arity();
  for (auto p : parents) fc.configs *= s[p].arity();
  fc.counts.assign(fc.configs * fc.arity, 0.0);
  for (const auto& x : d.instances()) {
    const double v = x.values[node];
    if (is_missing(v)) continue;
    std::size_t cfg = 0;
    bool ok = true;
    for (auto p : parents) {
      const double pv = x.values[p];
      if (is_missing(pv)) {
        ok = false;
        break;
      }
      cfg = cfg * s[p].arity() + static_cast<std::size_t>(pv);
    }
    if (ok) fc.counts[cfg * fc.arity + static_cast<std::size_t>(v)] += x.weight;
  }
  return fc;
}

// Replaces MISSING nominal values with the column's weighted mode.
Dataset impute_modes(const Dataset& d) {
  const auto& s = d.schema();
  std::vector<Instance> rows = d.instances();
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (!s[a].is_nominal()) continue;
    std::vector<double> w(s[a].arity(), 0.0);
    bool any_missing = false;
    for (const auto& x : rows) {
      if (is_missing(x.values[a])) any_missing = true;
      else w[static_cast<std::size_t>(x.values[a])] += x.weight;
    }
    if (!any_missing) continue;
    const auto mode = static_cast<double>(std::max_element(w.begin(), w.end()) - w.begin());
    for (auto& x : rows)
      if (is_missing(x.values[a])) x.values[a] = mode;
  }
  return Dataset(s, std::move(rows));
}

std::string label_of(const std::vector<std::string>& labels, std::size_t v) {
  return v < labels.size() ? labels[v] : std::to_string(v);
}

}  // namespace

double k2_node_score(const Dataset& d, std::size_t node, std::span<const std::size_t> parents) {
  auto fc = family_counts(d, node, parents);
  const double r = static_cast<double>(fc.arity);
  double score = 0.0;
  for (std::size_t j = 0; j < fc.configs; ++j) {
    double nij = 0.0;
    for (std::size_t k = 0; k < fc.arity; ++k) {
      const double nijk = fc.counts[j * fc.arity + k];
      nij += nijk;
      score += std::lgamma(nijk + 1.0);
    }
    score += std::lgamma(r) - std::lgamma(nij + r);
  }
  return score;
}

NetworkStructure k2_search(const Dataset& d, std::span<const std::size_t> ordering, int max_parents) {
  if (max_parents < 1) throw ConfigError("max_parents must be at least 1");
  const auto& s = d.schema();
  const auto features = s.feature_indices();
  if (ordering.empty() || ordering.front() != s.class_index())
    throw ConfigError("K2 ordering must start with the class attribute");
  if (ordering.size() != features.size() + 1) throw ConfigError("K2 ordering must cover every feature once");
  {
    std::vector<std::size_t> sorted(ordering.begin() + 1, ordering.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != features) throw ConfigError("K2 ordering must cover every feature once");
  }
  for (auto f : features)
    if (!s[f].is_nominal()) throw ConfigError("K2 search needs nominal features; '" + s[f].name + "' is numeric");

  NetworkStructure net;
  net.nodes.assign(ordering.begin(), ordering.end());
  net.parents.assign(net.nodes.size(), {});
  const auto cap = static_cast<std::size_t>(max_parents);
  for (std::size_t pos = 1; pos < net.nodes.size(); ++pos) {
    auto& pa = net.parents[pos];
    pa.push_back(0);
    auto schema_parents = [&](const std::vector<std::size_t>& positions) {
      std::vector<std::size_t> out;
      for (auto p : positions) out.push_back(net.nodes[p]);
      return out;
    };
    double score = k2_node_score(d, net.nodes[pos], schema_parents(pa));
    while (pa.size() < cap) {
      std::optional<std::size_t> best;
      double best_score = score;
      for (std::size_t cand = 0; cand < pos; ++cand) {
        if (std::find(pa.begin(), pa.end(), cand) != pa.end()) continue;
        auto trial = pa;
        trial.push_back(cand);
        const double sc = k2_node_score(d, net.nodes[pos], schema_parents(trial));
        if (sc > best_score) {
          best_score = sc;
          best = cand;
        }
      }
      if (!best) break;
      pa.push_back(*best);
      score = best_score;
    }
  }
  return net;
}

std::vector<std::size_t> default_k2_ordering(const Dataset& d) {
  const auto& s = d.schema();
  struct Ranked {
    std::size_t idx;
    double score;
  };
  std::vector<Ranked> ranked;
  for (auto f : s.feature_indices()) {
    auto t = contingency_table(d, s[f].name);
    ranked.push_back({f, t.degenerate() ? 0.0 : chi_squared(t)});
  }
  std::sort(ranked.begin(), ranked.end(), [&s](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return s[a.idx].name < s[b.idx].name;
  });
  std::vector<std::size_t> order{s.class_index()};
  for (const auto& r : ranked) order.push_back(r.idx);
  return order;
}

std::vector<Cpt> estimate_cpts(const NetworkStructure& net, const Dataset& d, double alpha) {
  if (!net.is_acyclic()) throw ConfigError("network structure has a cycle");
  const auto& s = d.schema();
  std::vector<Cpt> out;
  for (std::size_t pos = 0; pos < net.nodes.size(); ++pos) {
    std::vector<std::size_t> pa;
    for (auto p : net.parents[pos]) pa.push_back(net.nodes[p]);
    auto fc = family_counts(d, net.nodes[pos], pa);
    Cpt cpt;
    cpt.arity = fc.arity;
    for (auto p : pa) cpt.parent_arities.push_back(s[p].arity());
    cpt.probs.resize(fc.counts.size());
    for (std::size_t j = 0; j < fc.configs; ++j) {
      double nij = 0.0;
      for (std::size_t k = 0; k < fc.arity; ++k) nij += fc.counts[j * fc.arity + k];
      const double denom = nij + alpha * static_cast<double>(fc.arity);
      for (std::size_t k = 0; k < fc.arity; ++k)
        cpt.probs[j * fc.arity + k] =
            denom > 0 ? (fc.counts[j * fc.arity + k] + alpha) / denom : 1.0 / static_cast<double>(fc.arity);
    }
    out.push_back(std::move(cpt));
  }
  return out;
}

ClassDistribution ContributionTable::compose() const {
  std::vector<double> logs = log_prior;
  for (const auto& r : rows) {
    if (r.skipped) continue;
    for (std::size_t c = 0; c < logs.size(); ++c) logs[c] += r.log_prob[c];
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> w(logs.size());
  for (std::size_t c = 0; c < logs.size(); ++c) w[c] = std::exp(logs[c] - top);
  return ClassDistribution::from_weights(std::move(w));
}

BayesNet BayesNet::fit(const Dataset& d, const BayesNetOptions& opts) {
  return fit(d, opts, {});
}

BayesNet BayesNet::fit(const Dataset& d, const BayesNetOptions& opts, std::span<const std::size_t> ordering) {
  opts.validate();
  BayesNet m;
  m.schema_ = d.schema();
  Dataset nd = d;
  for (auto f : d.schema().feature_indices()) {
    if (!d.schema()[f].is_numeric()) continue;
    auto disc = fit_discretization(d, f);
    nd = apply_discretization(nd, f, disc);
    m.disc_.emplace(f, std::move(disc));
  }
  std::vector<std::size_t> order(ordering.begin(), ordering.end());
  if (order.empty()) order = default_k2_ordering(nd);
  m.structure_ = k2_search(impute_modes(nd), order, opts.max_parents);
  m.cpts_ = estimate_cpts(m.structure_, nd, opts.alpha);
  for (auto node : m.structure_.nodes) {
    std::vector<double> seen(nd.schema()[node].arity(), 0.0);
    for (const auto& x : nd.instances())
      if (!is_missing(x.values[node])) seen[static_cast<std::size_t>(x.values[node])] += x.weight;
    m.seen_.push_back(std::move(seen));
  }
  return m;
}

std::optional<std::size_t> BayesNet::node_value(const Instance& x, std::size_t pos) const {
  const auto attr = structure_.nodes[pos];
  const double v = x.values[attr];
  if (is_missing(v)) return std::nullopt;
  std::size_t idx;
  if (auto it = disc_.find(attr); it != disc_.end()) {
    idx = it->second.bin_of(v);
  } else {
    if (v < 0 || static_cast<std::size_t>(v) >= seen_[pos].size()) return std::nullopt;
    idx = static_cast<std::size_t>(v);
  }
  if (!(seen_[pos][idx] > 0)) return std::nullopt;
  return idx;
}

ContributionTable BayesNet::explain_contributions(const Instance& x) const {
  const auto& cls = schema_.class_attribute();
  const auto nc = cls.arity();
  ContributionTable t;
  t.classes = cls.values;
  t.log_prior.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) t.log_prior[c] = std::log(cpts_[0].at(0, c));

  std::vector<std::optional<std::size_t>> vals(structure_.nodes.size());
  for (std::size_t pos = 1; pos < structure_.nodes.size(); ++pos) vals[pos] = node_value(x, pos);

  for (std::size_t pos = 1; pos < structure_.nodes.size(); ++pos) {
    ContributionRow row;
    row.node = schema_[structure_.nodes[pos]].name;
    row.log_prob.assign(nc, 0.0);
    const auto& pa = structure_.parents[pos];
    row.skipped = !vals[pos];
    for (auto p : pa)
      if (p != 0 && !vals[p]) row.skipped = true;
    if (!row.skipped) {
      std::vector<std::size_t> pv(pa.size());
      for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t i = 0; i < pa.size(); ++i) pv[i] = pa[i] == 0 ? c : *vals[pa[i]];
        row.log_prob[c] = std::log(cpts_[pos].at(cpts_[pos].config_index(pv), *vals[pos]));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ClassDistribution BayesNet::distribution(const Instance& x) const { return explain_contributions(x).compose(); }

std::vector<std::string> BayesNet::node_labels(std::size_t pos) const {
  const auto attr = structure_.nodes[pos];
  if (auto it = disc_.find(attr); it != disc_.end()) return it->second.labels();
  return schema_[attr].values;
}

std::string BayesNet::describe() const {
  std::ostringstream out;
  out << "nodes: " << structure_.nodes.size() << "\n";
  for (std::size_t pos = 0; pos < structure_.nodes.size(); ++pos) {
    out << schema_[structure_.nodes[pos]].name << " <- ";
    const auto& pa = structure_.parents[pos];
    if (pa.empty()) out << "(none)";
    for (std::size_t i = 0; i < pa.size(); ++i)
      out << (i ? ", " : "") << schema_[structure_.nodes[pa[i]]].name;
    out << "\n";
  }
  out << "\n";
  for (std::size_t pos = 0; pos < structure_.nodes.size(); ++pos) {
    const auto& cpt = cpts_[pos];
    const auto labels = node_labels(pos);
    out << "P(" << schema_[structure_.nodes[pos]].name;
    const auto& pa = structure_.parents[pos];
    if (!pa.empty()) {
      out << " |";
      for (auto p : pa) out << ' ' << schema_[structure_.nodes[p]].name;
    }
    out << ")\n";
    std::vector<std::size_t> pv(pa.size(), 0);
    for (std::size_t j = 0; j < cpt.num_configs(); ++j) {
      out << "  ";
      if (!pa.empty()) {
        std::size_t rem = j;
        for (std::size_t i = pa.size(); i-- > 0;) {
          pv[i] = rem % cpt.parent_arities[i];
          rem /= cpt.parent_arities[i];
        }
        out << "[";
        for (std::size_t i = 0; i < pa.size(); ++i) out << (i ? "," : "") << label_of(node_labels(pa[i]), pv[i]);
        out << "] ";
      }
      for (std::size_t k = 0; k < cpt.arity; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", cpt.at(j, k));
        out << (k ? " " : "") << label_of(labels, k) << '=' << buf;
      }
      out << "\n";
    }
  }
  return out.str();
}

std::vector<std::string> BayesNet::explain_text(const Instance& x) const {
  auto t = explain_contributions(x);
  std::vector<std::string> lines;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  std::string prior = "log prior:";
  for (std::size_t c = 0; c < t.classes.size(); ++c) prior += " " + t.classes[c] + "=" + fmt(t.log_prior[c]);
  lines.push_back(prior);
  for (const auto& r : t.rows) {
    if (r.skipped) {
      lines.push_back(r.node + ": skipped");
      continue;
    }
    std::string line = r.node + ":";
    for (std::size_t c = 0; c < t.classes.size(); ++c) line += " " + t.classes[c] + "=" + fmt(r.log_prob[c]);
    lines.push_back(line);
  }
  lines.push_back("-> " + t.classes[t.compose().argmax()]);
  return lines;
}

void BayesNet::write_body(std::ostream& out) const {
  out << "discretized " << disc_.size() << "\n";
  for (const auto& [attr, disc] : disc_) {
    out << "attr " << attr << "\n";
    serial::write_vector(out, "cuts", disc.cuts);
  }
  serial::write_indices(out, "nodes", structure_.nodes);
  for (const auto& pa : structure_.parents) serial::write_indices(out, "parents", pa);
  for (std::size_t pos = 0; pos < cpts_.size(); ++pos) {
    out << "arity " << cpts_[pos].arity << "\n";
    serial::write_indices(out, "parent_arities", cpts_[pos].parent_arities);
    serial::write_vector(out, "probs", cpts_[pos].probs);
    serial::write_vector(out, "seen", seen_[pos]);
  }
}

BayesNet BayesNet::read_body(std::istream& in, const Schema& schema) {
  BayesNet m;
  m.schema_ = schema;
  auto nd = serial::read_int(in, "discretized");
  for (long long i = 0; i < nd; ++i) {
    auto attr = serial::read_int(in, "attr");
    if (attr < 0 || static_cast<std::size_t>(attr) >= schema.size()) throw DataError("model: attribute out of range");
    m.disc_.emplace(static_cast<std::size_t>(attr), Discretization{serial::read_vector(in, "cuts")});
  }
  m.structure_.nodes = serial::read_indices(in, "nodes");
  if (m.structure_.nodes.empty() || m.structure_.nodes[0] != schema.class_index())
    throw DataError("model: network must start at the class node");
  for (auto n : m.structure_.nodes)
    if (n >= schema.size()) throw DataError("model: node out of range");
  for (std::size_t i = 0; i < m.structure_.nodes.size(); ++i)
    m.structure_.parents.push_back(serial::read_indices(in, "parents"));
  if (!m.structure_.is_acyclic()) throw DataError("model: network has a cycle");
  for (std::size_t i = 0; i < m.structure_.nodes.size(); ++i) {
    Cpt cpt;
    cpt.arity = static_cast<std::size_t>(serial::read_int(in, "arity"));
    cpt.parent_arities = serial::read_indices(in, "parent_arities");
    cpt.probs = serial::read_vector(in, "probs");
    if (cpt.parent_arities.size() != m.structure_.parents[i].size() ||
        cpt.probs.size() != cpt.num_configs() * cpt.arity)
      throw DataError("model: CPT shape mismatch");
    m.cpts_.push_back(std::move(cpt));
    m.seen_.push_back(serial::read_vector(in, "seen"));
    if (m.seen_.back().size() != m.cpts_.back().arity) throw DataError("model: CPT shape mismatch");
  }
  return m;
}

}  // namespace bridgeml
