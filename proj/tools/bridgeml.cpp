// bridgeml: ingest -> select -> train -> evaluate -> experiment -> serve.
// Exit codes: 0 ok, 1 invalid arguments or configuration, 2 data errors.

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bridgeml/classifier.hpp"
#include "bridgeml/dataset_io.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/eval.hpp"
#include "bridgeml/experiment.hpp"
#include "bridgeml/featsel.hpp"
#include "bridgeml/ingest.hpp"
#include "bridgeml/service.hpp"
#include "bridgeml/synth.hpp"
#include "bridgeml/text.hpp"

using namespace bridgeml;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Learner flags shared by every subcommand that trains.
struct SpecFlags {
  std::string spec = "dtree";
  std::optional<double> confidence;
  std::optional<int> min_objects;
  std::optional<int> max_parents;
  std::optional<double> alpha;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--spec", spec, "Learner: dtree | bayesnet | oner, optionally with params (dtree:confidence=0.25)")
        ->capture_default_str();
    app->add_option("--confidence", confidence, "dtree pruning confidence factor (0, 0.5]");
    app->add_option("--min-objects", min_objects, "dtree minimum instances per leaf");
    app->add_option("--max-parents", max_parents, "bayesnet parent limit per node, class included");
    app->add_option("--alpha", alpha, "bayesnet CPT pseudo-count");
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  ClassifierSpec build() const {
    auto s = ClassifierSpec::parse(spec);
    auto need = [&](ModelKind k, const char* flag) {
      if (s.kind != k) throw ConfigError(std::string(flag) + " does not apply to " + std::string(to_string(s.kind)));
    };
    if (confidence) need(ModelKind::dtree, "--confidence"), s.params["confidence"] = format_double(*confidence);
    if (min_objects) need(ModelKind::dtree, "--min-objects"), s.params["min_objects"] = std::to_string(*min_objects);
    if (max_parents) need(ModelKind::bayesnet, "--max-parents"), s.params["max_parents"] = std::to_string(*max_parents);
    if (alpha) need(ModelKind::bayesnet, "--alpha"), s.params["alpha"] = format_double(*alpha);
    s.seed = seed;
    s.validate();
    return s;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& p : split(s, ',')) {
    auto t = trim(p);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

Dataset load_with_attrs(const std::string& dir, const std::string& attrs) {
  auto d = load_dataset_dir(dir);
  if (!attrs.empty()) {
    auto list = split_list(attrs);
    d = restrict_features(d, list);
  }
  return d;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["protocol"] = r.protocol;
  j["spec"] = r.spec;
  j["seed"] = r.seed;
  j["folds"] = r.folds;
  j["bias"] = r.bias ? ordered_json(*r.bias) : ordered_json(nullptr);
  j["attributes"] = r.attributes;
  j["weighted_recall"] = r.metrics.weighted_recall;
  j["weighted_precision"] = r.metrics.weighted_precision;
  auto pc = ordered_json::array();
  for (const auto& c : r.metrics.per_class)
    pc.push_back({{"class", c.cls}, {"support", c.support}, {"recall", c.recall}, {"precision", c.precision}});
  j["per_class"] = std::move(pc);
  j["classes"] = r.class_names;
  auto cm = ordered_json::array();
  for (std::size_t a = 0; a < r.confusion.classes(); ++a) {
    auto row = ordered_json::array();
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) row.push_back(r.confusion.at(a, p));
    cm.push_back(std::move(row));
  }
  j["confusion"] = std::move(cm);
  return j;
}

std::string confusion_csv(const EvalReport& r) {
  std::string out = "actual";
  for (const auto& c : r.class_names) out += "," + csv_escape(c);
  out += "\n";
  for (std::size_t a = 0; a < r.confusion.classes(); ++a) {
    out += csv_escape(r.class_names[a]);
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) out += "," + format_double(r.confusion.at(a, p));
    out += "\n";
  }
  return out;
}

void print_report(const EvalReport& r) {
  std::cout << r.protocol << "  " << r.spec << "  recall " << pct(100 * r.metrics.weighted_recall) << "%  precision "
            << pct(100 * r.metrics.weighted_precision) << "%\n";
}

std::string today_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return buf;
}

AdvisorService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("bridgeml"));
  spdlog::set_pattern("%l: %v");

  CLI::App app{"bridgeml: interpretable bridge design-type classifiers"};
  app.set_config("--settings", "", "INI/TOML file setting any flag; the command line wins");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off")->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse a fixed-width inventory and fuse hazard and cost data");
  std::string nbi, layout_path, schema_path, seismic_path, costs_path, deflator_path, out;
  std::string key_field, year_field = "year_built", state_field = "state";
  std::string excluded = "AK,HI,PR";
  bool post_1971 = false;
  ingest->add_option("--nbi", nbi, "Fixed-width inventory file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--layout", layout_path, "Layout file: name,start,end,type[,scale]")->required()->check(CLI::ExistingFile);
  ingest->add_option("--schema", schema_path, "Target dataset schema sidecar")->required()->check(CLI::ExistingFile);
  ingest->add_option("--seismic", seismic_path, "Seismic grid: lon lat pga per line")->check(CLI::ExistingFile);
  ingest->add_option("--costs", costs_path, "Cost table CSV: city,lat,lon,year,steel,concrete")->check(CLI::ExistingFile);
  ingest->add_option("--deflator", deflator_path, "Deflator CSV: year,multiplier")->check(CLI::ExistingFile);
  ingest->add_flag("--post-1971", post_1971, "Reject structures built before 1971");
  ingest->add_option("--year-field", year_field, "Layout field holding the year built")->capture_default_str();
  ingest->add_option("--state-field", state_field, "Layout field holding the state code")->capture_default_str();
  ingest->add_option("--exclude-states", excluded, "State codes rejected as excluded-region")->capture_default_str();
  ingest->add_option("--key", key_field, "Layout field identifying a structure; repeats are rejected");
  ingest->add_option("--out", out, "Output dataset directory")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Frequency table of a nominal attribute");
  std::string data_dir, attr;
  stats->add_option("--data", data_dir, "Dataset directory")->required();
  stats->add_option("--attr", attr, "Attribute (default: the class)");
  stats->add_option("--out", out, "Write the table as CSV here");

  // select
  auto* select = app.add_subcommand("select", "Rank attributes and run leave-one-attribute-out");
  SpecFlags select_spec;
  select_spec.add(select);
  double cutoff = 0.7, loo_threshold = 1.0;
  std::size_t folds = 10;
  bool skip_loo = false;
  std::string attrs;
  select->add_option("--data", data_dir, "Dataset directory")->required();
  select->add_option("--attrs", attrs, "Candidate features a,b,c (default: every feature)");
  select->add_option("--cutoff", cutoff, "Keep ranked attributes until a score falls below this ratio of its predecessor")
      ->capture_default_str();
  select->add_option("--loo-threshold", loo_threshold, "Recall drop (percentage points) marking an attribute essential")
      ->capture_default_str();
  select->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
  select->add_flag("--no-loo", skip_loo, "Skip leave-one-attribute-out");
  select->add_option("--out", out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train and save a model");
  SpecFlags train_spec;
  train_spec.add(train);
  std::string state, state_attr = "state", trained_at;
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--attrs", attrs, "Features a,b,c (default: every feature)");
  train->add_option("--state", state, "Train on this state's instances only");
  train->add_option("--state-attr", state_attr, "State attribute")->capture_default_str();
  train->add_option("--folds", folds, "Folds for the stored cross-validated recall (0 skips)")->capture_default_str();
  train->add_option("--trained-at", trained_at, "Training date recorded in the model (default: today, UTC)");
  train->add_option("--out", out, "Model file")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Class distribution for each row of an instance CSV");
  std::string model_path, instance_path;
  predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--instance", instance_path, "CSV with a header of attribute names; '?' or absent = missing")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--out", out, "Write JSON here instead of printing");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  SpecFlags eval_spec;
  eval_spec.add(evaluate);
  std::optional<double> bias;
  bool whole = false;
  evaluate->add_option("--data", data_dir, "Dataset directory")->required();
  evaluate->add_option("--attrs", attrs, "Features a,b,c (default: every feature)");
  evaluate->add_option("--folds", folds, "Folds")->capture_default_str();
  evaluate->add_option("--bias", bias, "Resample training folds toward uniform classes with this bias in [0, 1]");
  evaluate->add_flag("--resample-whole-dataset", whole, "Resample once before splitting instead of per training fold");
  evaluate->add_option("--out", out, "Output directory for report.json and confusion.csv");

  // holdout
  auto* holdout = app.add_subcommand("holdout", "Hold-one-state-out or per-state cross-validation");
  SpecFlags holdout_spec;
  holdout_spec.add(holdout);
  std::string protocol = "hold-one-state-out";
  holdout->add_option("--data", data_dir, "Dataset directory")->required();
  holdout->add_option("--attrs", attrs, "Features a,b,c (default: every feature)");
  holdout->add_option("--state-attr", state_attr, "State attribute")->capture_default_str();
  holdout->add_option("--protocol", protocol, "hold-one-state-out | per-state-cv")
      ->check(CLI::IsMember({"hold-one-state-out", "per-state-cv"}))
      ->capture_default_str();
  holdout->add_option("--folds", folds, "Folds for per-state-cv")->capture_default_str();
  holdout->add_option("--bias", bias, "Per-state-cv training-fold resampling bias");
  holdout->add_flag("--resample-whole-dataset", whole, "Resample once before splitting instead of per training fold");
  holdout->add_option("--out", out, "Output directory")->required();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a per-state experiment grid");
  std::string grid_path;
  experiment->add_option("--config", grid_path, "Experiment grid file")->required()->check(CLI::ExistingFile);
  experiment->add_option("--data", data_dir, "Dataset directory")->required();
  experiment->add_option("--out", out, "Report directory")->required();

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of per-state recall with climate");
  std::string recall_path, climate_path;
  correlate->add_option("--recall", recall_path, "CSV state,recall")->required()->check(CLI::ExistingFile);
  correlate->add_option("--climate", climate_path, "CSV state,temp,humidity,rain,snow")->required()->check(CLI::ExistingFile);
  correlate->add_option("--out", out, "Write JSON here instead of printing");

  // model inspect
  auto* model = app.add_subcommand("model", "Model utilities");
  model->require_subcommand(1);
  auto* inspect = model->add_subcommand("inspect", "Print a model's structure and metadata");
  inspect->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve models over HTTP");
  std::string models_dir, host = "127.0.0.1", grid_file;
  int port = 8080;
  serve->add_option("--models", models_dir, "Directory of *.model files")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--grid", grid_file, "Seismic grid for lat/lon lookups")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Write the synthetic multi-state bridge fixture");
  SynthOptions synth_opts;
  synth->add_option("--instances", synth_opts.instances, "Instance count")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Random seed")->capture_default_str();
  synth->add_option("--noise", synth_opts.label_noise, "Label noise rate")->capture_default_str();
  synth->add_option("--out", out, "Output dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*ingest) {
      auto layout = read_layout(layout_path);
      auto target = read_schema(schema_path);
      NbiOptions o;
      o.post_1971 = post_1971;
      o.year_field = year_field;
      o.state_field = state_field;
      o.key_field = key_field;
      auto ex = split_list(excluded);
      o.excluded_states = {ex.begin(), ex.end()};
      auto r = parse_nbi(nbi, layout, target, o);
      Dataset d = r.data;
      std::vector<std::string> warnings = r.warnings;
      if (!seismic_path.empty()) {
        auto f = attach_seismic(d, SeismicGrid::read(seismic_path));
        d = std::move(f.data);
        warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
      }
      if (!costs_path.empty()) {
        CostOptions co;
        co.year_attr = year_field;
        if (!deflator_path.empty()) co.deflator = read_deflator(deflator_path);
        auto f = attach_costs(d, CostTable::read(costs_path), co);
        d = std::move(f.data);
        warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
      }
      save_dataset_dir(d, out);
      write_file_atomic(fs::path(out) / "rejects.csv", format_reject_report(r.rejects));
      ordered_json j;
      j["lines"] = r.lines;
      j["accepted"] = d.size();
      j["rejected"] = r.rejects.rejects.size();
      for (auto reason : {RejectReason::malformed_field, RejectReason::pre_1971, RejectReason::excluded_region,
                          RejectReason::duplicate})
        j["rejected_by_reason"][std::string(to_string(reason))] = r.rejects.count(reason);
      j["warnings"] = warnings;
      write_file_atomic(fs::path(out) / "ingest.json", j.dump(2) + "\n");
      std::cout << "accepted " << d.size() << " of " << r.lines << " lines (" << r.rejects.rejects.size()
                << " rejected)\n";
    } else if (*stats) {
      auto d = load_dataset_dir(data_dir);
      auto t = dataset_stats(d, attr.empty() ? d.schema().class_attribute().name : attr);
      std::string csv = "value,count,percent\n";
      for (const auto& r : t.rows) csv += csv_escape(r.value) + "," + std::to_string(r.count) + "," + pct(r.percent) + "\n";
      if (out.empty()) std::cout << csv;
      else write_file_atomic(out, csv);
    } else if (*select) {
      auto spec = select_spec.build();
      auto d = load_with_attrs(data_dir, attrs);
      fs::create_directories(out);
      for (auto metric : {Metric::chi_squared, Metric::info_gain}) {
        std::string csv = "attribute,score,kept\n";
        for (const auto& s : rank_attributes(d, metric, cutoff))
          csv += csv_escape(s.attribute) + "," + format_double(s.score) + "," + (s.kept ? "yes" : "no") + "\n";
        write_file_atomic(fs::path(out) / ("ranking_" + std::string(to_string(metric)) + ".csv"), csv);
      }
      auto ranked = rank_attributes(d, Metric::chi_squared, cutoff);
      LooResult loo;
      if (!skip_loo) {
        loo = leave_one_out_selection(d, spec, loo_threshold, folds, spec.seed);
        std::string csv = "attribute,recall_drop,precision_drop,essential\n";
        for (const auto& i : loo.impacts)
          csv += csv_escape(i.attribute) + "," + pct(i.recall_drop) + "," + pct(i.precision_drop) + "," +
                 (i.essential ? "yes" : "no") + "\n";
        write_file_atomic(fs::path(out) / "loo.csv", csv);
      }
      std::string sel;
      for (const auto& a : combine_selections(ranked, loo)) sel += a + "\n";
      write_file_atomic(fs::path(out) / "selected.txt", sel);
      std::cout << sel;
    } else if (*train) {
      auto spec = train_spec.build();
      auto d = load_with_attrs(data_dir, attrs);
      if (!state.empty()) {
        auto parts = partition_by(d, state_attr);
        auto it = parts.parts.find(state);
        if (it == parts.parts.end()) throw DataError("no instances for state " + state);
        d = it->second;
      } else if (d.schema().find(state_attr) && d.schema().at(state_attr).role == Role::feature) {
        d = with_role(d, state_attr, Role::meta);
      }
      auto m = fit(spec, d);
      m.metadata["state"] = state.empty() ? "national" : state;
      std::string names;
      for (const auto& n : d.schema().feature_names()) names += (names.empty() ? "" : ",") + n;
      m.metadata["attributes"] = names;
      m.metadata["trained_at"] = trained_at.empty() ? today_utc() : trained_at;
      m.metadata["instances"] = std::to_string(drop_missing_class(d).size());
      if (folds > 0) {
        CvOptions o;
        o.folds = folds;
        o.seed = spec.seed;
        auto r = cross_validate(drop_missing_class(d), spec, o);
        m.metadata["cv_recall"] = format_double(r.metrics.weighted_recall);
        m.metadata["cv_precision"] = format_double(r.metrics.weighted_precision);
        m.metadata["cv_folds"] = std::to_string(folds);
      }
      write_file_atomic(out, serialize_model(m));
      std::cout << m.inspect();
    } else if (*predict) {
      auto m = read_model_file(model_path);
      const auto& schema = m.schema();
      auto lines = read_lines(instance_path);
      if (lines.empty()) throw DataError("instance file is empty");
      auto header = split_csv_line(lines[0]);
      std::vector<std::size_t> cols;
      for (const auto& h : header) cols.push_back(schema.index(trim(h)));
      ordered_json all = ordered_json::array();
      std::string text;
      for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) continue;
        auto f = split_csv_line(lines[ln]);
        if (f.size() != cols.size()) throw DataError("instance line " + std::to_string(ln + 1) + ": field count");
        Instance x;
        x.values.assign(schema.size(), kMissing);
        for (std::size_t i = 0; i < cols.size(); ++i) {
          auto v = trim(f[i]);
          const auto& a = schema[cols[i]];
          if (v.empty() || v == "?" || cols[i] == schema.class_index()) continue;
          if (a.is_nominal()) {
            auto k = a.index_of(v);
            if (!k) {
              spdlog::warn("row {}: '{}' is not a value of {}; treated as missing", ln, v, a.name);
              continue;
            }
            x.values[cols[i]] = static_cast<double>(*k);
          } else {
            auto d = parse_double(v);
            if (!d) throw DataError("'" + std::string(v) + "' is not a number for " + a.name);
            x.values[cols[i]] = *d;
          }
        }
        auto dist = m.predict_distribution(x);
        std::vector<std::size_t> order(dist.p.size());
        for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist.p[a] > dist.p[b]; });
        ordered_json row = ordered_json::array();
        text += "row " + std::to_string(ln) + ":";
        for (auto c : order) {
          row.push_back({{"class", schema.class_attribute().values[c]}, {"p", dist.p[c]}});
          text += " " + schema.class_attribute().values[c] + "=" + pct(100 * dist.p[c]) + "%";
        }
        text += "\n";
        all.push_back({{"distribution", row}, {"explanation", m.model().explain_text(x)}});
      }
      if (out.empty()) std::cout << text;
      else write_file_atomic(out, all.dump(2) + "\n");
    } else if (*evaluate) {
      auto spec = eval_spec.build();
      auto d = drop_missing_class(load_with_attrs(data_dir, attrs));
      CvOptions o;
      o.folds = folds;
      o.seed = spec.seed;
      o.resample_bias = bias;
      o.resample_whole_dataset = whole;
      if (whole && !bias) throw ConfigError("--resample-whole-dataset needs --bias");
      auto r = cross_validate(d, spec, o);
      print_report(r);
      if (!out.empty()) {
        fs::create_directories(out);
        write_file_atomic(fs::path(out) / "report.json", report_json(r).dump(2) + "\n");
        write_file_atomic(fs::path(out) / "confusion.csv", confusion_csv(r));
      }
    } else if (*holdout) {
      auto spec = holdout_spec.build();
      auto d = load_with_attrs(data_dir, attrs);
      HoldoutResult h;
      if (protocol == "hold-one-state-out") {
        if (bias) throw ConfigError("--bias applies to per-state-cv only");
        h = hold_one_state_out(d, spec, state_attr);
      } else {
        CvOptions o;
        o.folds = folds;
        o.seed = spec.seed;
        o.resample_bias = bias;
        o.resample_whole_dataset = whole;
        h = per_state_cv(d, spec, state_attr, o);
      }
      fs::create_directories(out);
      std::string csv = "state,instances,recall,precision\n";
      ordered_json j;
      j["protocol"] = protocol;
      j["spec"] = spec.to_string();
      for (const auto& [s, r] : h.per_state) {
        csv += csv_escape(s) + "," + format_double(r.confusion.total()) + "," + pct(100 * r.metrics.weighted_recall) +
               "," + pct(100 * r.metrics.weighted_precision) + "\n";
        j["states"][s] = report_json(r);
        print_report(r);
      }
      j["summary"] = {{"states", h.summary.n},
                      {"mean_recall", h.summary.mean_recall},
                      {"sd_recall", h.summary.sd_recall},
                      {"mean_precision", h.summary.mean_precision},
                      {"sd_precision", h.summary.sd_precision}};
      j["notes"] = h.notes;
      write_file_atomic(fs::path(out) / "states.csv", csv);
      write_file_atomic(fs::path(out) / "summary.json", j.dump(2) + "\n");
      std::cout << "mean recall " << pct(h.summary.mean_recall) << " (sd " << pct(h.summary.sd_recall)
                << "), mean precision " << pct(h.summary.mean_precision) << " (sd " << pct(h.summary.sd_precision)
                << ")\n";
      for (const auto& n : h.notes) std::cerr << "note: " << n << "\n";
    } else if (*experiment) {
      auto grid = read_grid(grid_path);
      auto r = run_experiment(load_dataset_dir(data_dir), grid);
      write_experiment(r, grid, out);
      std::cout << r.reports.size() << " cells written to " << out << "\n";
      for (const auto& n : r.notes) std::cerr << "note: " << n << "\n";
    } else if (*correlate) {
      std::map<std::string, double> recall;
      auto lines = read_lines(recall_path);
      for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto f = split_csv_line(lines[i]);
        if (f.size() != 2) throw DataError("recall line " + std::to_string(i + 1) + ": expected state,recall");
        auto v = parse_double(f[1]);
        if (!v) throw DataError("recall line " + std::to_string(i + 1) + ": bad number");
        recall[std::string(trim(f[0]))] = *v;
      }
      auto c = correlate_external(recall, read_climate_table(climate_path));
      ordered_json j;
      j["states"] = c.states;
      for (const auto& [k, v] : c.r) j["pearson"][k] = v ? ordered_json(*v) : ordered_json(nullptr);
      if (out.empty()) std::cout << j.dump(2) << "\n";
      else write_file_atomic(out, j.dump(2) + "\n");
    } else if (*inspect) {
      std::cout << read_model_file(model_path).inspect();
    } else if (*serve) {
      std::optional<SeismicGrid> grid;
      if (!grid_file.empty()) grid = SeismicGrid::read(grid_file);
      AdvisorService svc(models_dir, std::move(grid));
      auto snap = svc.registry().snapshot();
      for (const auto& e : snap->errors) std::cerr << "warning: " << e << "\n";
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << snap->models.size() << " models on " << host << ":" << port << "\n";
      if (!svc.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
    } else if (*synth) {
      save_dataset_dir(synth_bridges(synth_opts), out);
      std::cout << "wrote " << synth_opts.instances << " instances to " << out << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
