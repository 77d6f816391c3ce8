#include "bridgeml/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "bridgeml/errors.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

void ExperimentGrid::validate() const {
  if (folds < 2) throw ConfigError("experiment needs at least 2 folds");
  if (models.empty()) throw ConfigError("experiment lists no models");
  for (const auto& m : models) ClassifierSpec::parse(m).validate();
  if (configs.empty()) throw ConfigError("experiment has no [config] sections");
  std::set<std::string> names;
  for (const auto& c : configs) {
    if (!names.insert(c.name).second) throw ConfigError("duplicate config " + c.name);
    if (c.attrs.empty()) throw ConfigError("config " + c.name + " lists no attrs");
    if (c.bias && !(*c.bias >= 0 && *c.bias <= 1)) throw ConfigError("config " + c.name + ": bias must lie in [0, 1]");
  }
  for (const auto& c : configs)
    if (!c.baseline.empty() && !names.count(c.baseline))
      throw ConfigError("config " + c.name + " names unknown baseline " + c.baseline);
}

namespace {

std::vector<std::string> list_value(std::string_view v) {
  std::vector<std::string> out;
  for (const auto& p : split(v, ',')) {
    auto t = trim(p);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

bool bool_value(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + key);
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

ExperimentGrid parse_grid(std::string_view text) {
  ExperimentGrid g;
  enum { none, global, config } section = none;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "grid line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      auto head = trim(line.substr(1, line.size() - 2));
      if (head == "global") {
        section = global;
      } else if (head.substr(0, 7) == "config ") {
        section = config;
        GridConfig c;
        c.name = std::string(trim(head.substr(7)));
        if (c.name.empty()) throw ConfigError(where + "config needs a name");
        g.configs.push_back(std::move(c));
      } else {
        throw ConfigError(where + "unknown section [" + std::string(head) + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (section == global) {
      if (key == "state_attr") g.state_attr = std::string(value);
      else if (key == "folds") {
        auto v = parse_int(value);
        if (!v || *v < 2) throw ConfigError(where + "folds must be an integer >= 2");
        g.folds = static_cast<std::size_t>(*v);
      } else if (key == "seed") {
        auto v = parse_int(value);
        if (!v || *v < 0) throw ConfigError(where + "seed must be a non-negative integer");
        g.seed = static_cast<std::uint64_t>(*v);
      } else if (key == "models") g.models = list_value(value);
      else if (key == "states") g.states = list_value(value);
      else if (key == "resample_whole_dataset") g.resample_whole_dataset = bool_value(value, key);
      else throw ConfigError(where + "unknown key " + key);
    } else if (section == config) {
      auto& c = g.configs.back();
      if (key == "attrs") c.attrs = list_value(value);
      else if (key == "bias") {
        auto v = parse_double(value);
        if (!v) throw ConfigError(where + "bad bias");
        c.bias = *v;
      } else if (key == "baseline") c.baseline = std::string(value);
      else throw ConfigError(where + "unknown key " + key);
    } else {
      throw ConfigError(where + "key outside a section");
    }
  }
  g.validate();
  return g;
}

ExperimentGrid read_grid(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : read_lines(path)) text += l + "\n";
  return parse_grid(text);
}

ExperimentResult run_experiment(const Dataset& national, const ExperimentGrid& grid) {
  grid.validate();
  const auto& schema = national.schema();
  const auto si = schema.index(grid.state_attr);
  for (const auto& c : grid.configs)
    for (const auto& a : c.attrs) {
      if (schema.index(a) == si) throw ConfigError("config " + c.name + " lists the state attribute");
      if (schema.index(a) == schema.class_index()) throw ConfigError("config " + c.name + " lists the class");
    }
  for (const auto& s : grid.states)
    if (!schema[si].index_of(s)) throw ConfigError("unknown state " + s);

  ExperimentResult out;
  const Dataset data = drop_missing_class(national);
  for (const auto& c : grid.configs) {
    auto parts = partition_by(restrict_features(data, c.attrs), grid.state_attr);
    std::vector<std::string> states = grid.states;
    if (states.empty())
      for (const auto& [s, p] : parts.parts) states.push_back(s);
    for (const auto& spec_text : grid.models) {
      auto spec = ClassifierSpec::parse(spec_text);
      spec.seed = grid.seed;
      for (const auto& s : states) {
        auto it = parts.parts.find(s);
        if (it == parts.parts.end() || it->second.size() < grid.folds) {
          out.notes.push_back("config " + c.name + ": state " + s + " has too few instances; skipped");
          continue;
        }
        CvOptions o;
        o.folds = grid.folds;
        o.seed = grid.seed;
        o.resample_bias = c.bias;
        o.resample_whole_dataset = grid.resample_whole_dataset;
        auto r = cross_validate(it->second, spec, o);
        r.protocol = "cv" + std::to_string(grid.folds) + ":" + s;
        out.reports.emplace(CellKey{c.name, spec_text, s}, std::move(r));
      }
    }
  }
  std::sort(out.notes.begin(), out.notes.end());
  out.notes.erase(std::unique(out.notes.begin(), out.notes.end()), out.notes.end());
  return out;
}

std::vector<DeltaRow> deltas(const ExperimentResult& r, std::string_view config, std::string_view baseline) {
  std::vector<DeltaRow> out;
  for (const auto& [key, rep] : r.reports) {
    const auto& [cfg, model, state] = key;
    if (cfg != config) continue;
    auto base = r.reports.find(CellKey{std::string(baseline), model, state});
    if (base == r.reports.end()) continue;
    DeltaRow d;
    d.state = state;
    d.model = model;
    d.recall = 100.0 * (rep.metrics.weighted_recall - base->second.metrics.weighted_recall);
    d.precision = 100.0 * (rep.metrics.weighted_precision - base->second.metrics.weighted_precision);
    out.push_back(std::move(d));
  }
  return out;
}

void write_experiment(const ExperimentResult& r, const ExperimentGrid& grid, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  std::string abs = "config,model,state,instances,recall,precision\n";
  std::string per_class = "config,model,state,class,support,recall,precision\n";
  for (const auto& [key, rep] : r.reports) {
    const auto& [cfg, model, state] = key;
    const auto prefix = csv_escape(cfg) + "," + csv_escape(model) + "," + csv_escape(state) + ",";
    abs += prefix + format_double(rep.confusion.total()) + "," + pct(100 * rep.metrics.weighted_recall) + "," +
           pct(100 * rep.metrics.weighted_precision) + "\n";
    for (const auto& c : rep.metrics.per_class)
      per_class += prefix + csv_escape(c.cls) + "," + format_double(c.support) + "," + pct(100 * c.recall) + "," +
                   pct(100 * c.precision) + "\n";
  }
  write_file_atomic(out / "absolute.csv", abs);
  write_file_atomic(out / "per_class.csv", per_class);

  nlohmann::ordered_json summary;
  summary["folds"] = grid.folds;
  summary["seed"] = grid.seed;
  summary["resample_whole_dataset"] = grid.resample_whole_dataset;
  summary["notes"] = r.notes;
  auto& cells = summary["configs"] = nlohmann::ordered_json::array();
  for (const auto& c : grid.configs) {
    for (const auto& m : grid.models) {
      std::vector<const EvalReport*> reps;
      for (const auto& [key, rep] : r.reports)
        if (std::get<0>(key) == c.name && std::get<1>(key) == m) reps.push_back(&rep);
      auto s = summarize(reps);
      nlohmann::ordered_json cell;
      cell["config"] = c.name;
      cell["model"] = m;
      cell["attrs"] = c.attrs;
      cell["bias"] = c.bias ? nlohmann::ordered_json(*c.bias) : nlohmann::ordered_json(nullptr);
      cell["states"] = s.n;
      cell["mean_recall"] = s.mean_recall;
      cell["sd_recall"] = s.sd_recall;
      cell["mean_precision"] = s.mean_precision;
      cell["sd_precision"] = s.sd_precision;
      cells.push_back(std::move(cell));
    }
    if (c.baseline.empty()) continue;
    std::string delta = "state,model,recall_delta,precision_delta\n";
    for (const auto& d : deltas(r, c.name, c.baseline))
      delta += csv_escape(d.state) + "," + csv_escape(d.model) + "," + pct(d.recall) + "," + pct(d.precision) + "\n";
    write_file_atomic(out / ("delta_" + c.name + "_vs_" + c.baseline + ".csv"), delta);
  }
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
}

}  // namespace bridgeml
