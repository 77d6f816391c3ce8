#include "bridgeml/service.hpp"

#include <algorithm>
#include <numeric>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bridgeml/bayesnet.hpp"
#include "bridgeml/dtree.hpp"
#include "bridgeml/errors.hpp"

namespace bridgeml {

using nlohmann::ordered_json;

ModelRegistry::ModelRegistry(std::filesystem::path dir) : dir_(std::move(dir)) { reload(); }

std::shared_ptr<const RegistrySnapshot> ModelRegistry::reload() {
  auto snap = std::make_shared<RegistrySnapshot>();
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir_, ec))
    for (const auto& e : std::filesystem::directory_iterator(dir_, ec))
      if (e.is_regular_file() && e.path().extension() == ".model") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      auto m = std::make_shared<const TrainedModel>(read_model_file(f.string()));
      RegistryEntry e;
      auto it = m->metadata.find("state");
      e.state = it != m->metadata.end() && !it->second.empty() ? it->second : f.stem().string();
      e.kind = std::string(to_string(m->kind()));
      e.file = f.filename().string();
      e.model = std::move(m);
      auto key = std::make_pair(e.state, e.kind);
      if (snap->models.count(key)) {
        snap->errors.push_back(e.file + ": duplicate model for " + e.state + "/" + e.kind);
        continue;
      }
      snap->models.emplace(std::move(key), std::move(e));
    } catch (const std::exception& ex) {
      snap->errors.push_back(f.filename().string() + ": " + ex.what());
      spdlog::warn("skipping model {}: {}", f.string(), ex.what());
    }
  }
  std::lock_guard lock(mu_);
  current_ = snap;
  return snap;
}

std::shared_ptr<const RegistrySnapshot> ModelRegistry::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

namespace {

struct RequestError {
  int status;
  std::string message;
};

HttpReply error_reply(int status, const std::string& msg) {
  ordered_json j;
  j["error"] = msg;
  return {status, j.dump()};
}

ordered_json parse_body(const std::string& body) {
  auto j = ordered_json::parse(body, nullptr, false);
  if (j.is_discarded()) throw RequestError{422, "request body is not valid JSON"};
  if (!j.is_object()) throw RequestError{422, "request body must be a JSON object"};
  return j;
}

std::string string_field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw RequestError{422, std::string("'") + key + "' must be a string"};
  return it->get<std::string>();
}

struct Prepared {
  std::shared_ptr<const TrainedModel> model;
  std::string state, kind;
  Instance x;
  std::vector<std::string> notes;
};

Prepared prepare(const ordered_json& req, const ModelRegistry& reg, const std::optional<SeismicGrid>& grid) {
  Prepared p;
  p.state = string_field(req, "state");
  p.kind = string_field(req, "kind");
  try {
    p.kind = std::string(to_string(parse_model_kind(p.kind)));
  } catch (const Error&) {
    throw RequestError{422, "unknown model kind '" + p.kind + "'"};
  }
  auto snap = reg.snapshot();
  auto it = snap->models.find({p.state, p.kind});
  if (it == snap->models.end()) throw RequestError{404, "no " + p.kind + " model for state '" + p.state + "'"};
  p.model = it->second.model;

  const auto& schema = p.model->schema();
  p.x.values.assign(schema.size(), kMissing);
  std::optional<double> lat, lon;
  bool pga_given = false;
  auto fit = req.find("features");
  if (fit != req.end() && !fit->is_null()) {
    if (!fit->is_object()) throw RequestError{422, "'features' must be an object"};
    for (const auto& [name, v] : fit->items()) {
      auto idx = schema.find(name);
      if (!idx) {
        if (name == "lat" || name == "lon") {
          if (!v.is_null() && !v.is_number()) throw RequestError{422, "'" + name + "' must be a number"};
          if (v.is_number()) (name == "lat" ? lat : lon) = v.get<double>();
          continue;
        }
        throw RequestError{422, "unknown feature '" + name + "'"};
      }
      if (*idx == schema.class_index()) continue;
      const auto& a = schema[*idx];
      if (v.is_null()) continue;
      if (a.is_nominal()) {
        if (!v.is_string()) throw RequestError{422, "'" + name + "' takes a category label"};
        if (auto k = a.index_of(v.get<std::string>())) p.x.values[*idx] = static_cast<double>(*k);
        else p.notes.push_back(name + "='" + v.get<std::string>() + "' is not a known label; treated as missing");
      } else {
        if (!v.is_number()) throw RequestError{422, "'" + name + "' must be a number"};
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw RequestError{422, "'" + name + "' must be finite"};
        p.x.values[*idx] = d;
        if (name == kSeismicAttr) pga_given = true;
      }
      if (name == "lat") lat = p.x.values[*idx];
      if (name == "lon") lon = p.x.values[*idx];
    }
  }
  if (auto pi = schema.find(kSeismicAttr); pi && !pga_given && lat && lon) {
    if (!grid) {
      p.notes.push_back("no seismic grid loaded; seismic_pga left missing");
    } else if (auto pga = grid->lookup(*lat, *lon)) {
      p.x.values[*pi] = *pga;
      p.notes.push_back("seismic_pga looked up at grid point (" + std::to_string(grid->snapped(*lat)) + ", " +
                        std::to_string(grid->snapped(*lon)) + ")");
    } else {
      p.notes.push_back("location outside the seismic grid; seismic_pga left missing");
    }
  }
  return p;
}

ordered_json distribution_json(const ClassDistribution& dist, const Schema& schema) {
  std::vector<std::size_t> order(dist.p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist.p[a] > dist.p[b]; });
  auto arr = ordered_json::array();
  for (auto c : order) {
    ordered_json e;
    e["class"] = schema.class_attribute().values[c];
    e["p"] = dist.p[c];
    arr.push_back(std::move(e));
  }
  return arr;
}

ordered_json explanation_json(const TrainedModel& m, const Instance& x) {
  ordered_json out = ordered_json::array();
  for (const auto& line : m.model().explain_text(x)) out.push_back(line);
  return out;
}

ordered_json details_json(const TrainedModel& m, const Instance& x) {
  if (const auto* tree = dynamic_cast<const DecisionTree*>(&m.model())) {
    auto path = ordered_json::array();
    for (const auto& s : tree->explain_path(x).steps) {
      ordered_json step;
      step["attribute"] = s.attribute;
      step["test"] = s.test;
      step["value"] = s.value;
      if (!s.routing.empty()) {
        auto r = ordered_json::array();
        for (const auto& [t, w] : s.routing) r.push_back({{"branch", t}, {"weight", w}});
        step["routing"] = std::move(r);
      }
      path.push_back(std::move(step));
    }
    return {{"path", std::move(path)}};
  }
  if (const auto* bn = dynamic_cast<const BayesNet*>(&m.model())) {
    auto t = bn->explain_contributions(x);
    ordered_json j;
    j["classes"] = t.classes;
    j["log_prior"] = t.log_prior;
    auto rows = ordered_json::array();
    for (const auto& r : t.rows) rows.push_back({{"node", r.node}, {"skipped", r.skipped}, {"log_prob", r.log_prob}});
    j["rows"] = std::move(rows);
    return {{"contributions", std::move(j)}};
  }
  return ordered_json::object();
}

template <class F>
HttpReply guarded(F&& f) {
  try {
    return f();
  } catch (const RequestError& e) {
    return error_reply(e.status, e.message);
  } catch (const Error& e) {
    return error_reply(422, e.what());
  } catch (const ordered_json::exception& e) {
    return error_reply(422, e.what());
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return error_reply(500, "internal error");
  }
}

}  // namespace

AdvisorService::AdvisorService(std::filesystem::path model_dir, std::optional<SeismicGrid> grid)
    : registry_(std::move(model_dir)), grid_(std::move(grid)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

AdvisorService::~AdvisorService() { stop(); }

HttpReply AdvisorService::list_models() const {
  return guarded([&] {
    auto snap = registry_.snapshot();
    ordered_json j;
    auto arr = ordered_json::array();
    for (const auto& [key, e] : snap->models) {
      ordered_json m;
      m["state"] = e.state;
      m["kind"] = e.kind;
      m["spec"] = e.model->spec().to_string();
      m["file"] = e.file;
      m["fingerprint"] = e.model->fingerprint();
      m["attributes"] = e.model->schema().feature_names();
      const auto& md = e.model->metadata;
      auto rec = md.find("cv_recall");
      m["cv_recall"] = rec != md.end() ? ordered_json(std::stod(rec->second)) : ordered_json(nullptr);
      auto at = md.find("trained_at");
      m["trained_at"] = at != md.end() ? ordered_json(at->second) : ordered_json(nullptr);
      arr.push_back(std::move(m));
    }
    j["models"] = std::move(arr);
    j["errors"] = snap->errors;
    return HttpReply{200, j.dump()};
  });
}

HttpReply AdvisorService::predict(const std::string& body) const {
  return guarded([&] {
    auto p = prepare(parse_body(body), registry_, grid_);
    const auto dist = p.model->predict_distribution(p.x);
    ordered_json j;
    j["state"] = p.state;
    j["kind"] = p.kind;
    j["distribution"] = distribution_json(dist, p.model->schema());
    j["explanation"] = explanation_json(*p.model, p.x);
    const auto details = details_json(*p.model, p.x);
    for (const auto& [k, v] : details.items()) j[k] = v;
    j["notes"] = p.notes;
    return HttpReply{200, j.dump()};
  });
}

HttpReply AdvisorService::whatif(const std::string& body) const {
  return guarded([&] {
    auto req = parse_body(body);
    const auto vary = string_field(req, "vary");
    auto p = prepare(req, registry_, grid_);
    const auto& schema = p.model->schema();
    auto vi = schema.find(vary);
    if (!vi) throw RequestError{422, "vary names unknown attribute '" + vary + "'"};
    if (!schema[*vi].is_nominal() || *vi == schema.class_index())
      throw RequestError{422, "vary must name a nominal feature"};
    ordered_json j;
    j["state"] = p.state;
    j["kind"] = p.kind;
    j["vary"] = vary;
    j["base"] = {{"distribution", distribution_json(p.model->predict_distribution(p.x), schema)},
                 {"explanation", explanation_json(*p.model, p.x)}};
    auto rows = ordered_json::array();
    for (std::size_t v = 0; v < schema[*vi].arity(); ++v) {
      Instance x = p.x;
      x.values[*vi] = static_cast<double>(v);
      const auto dist = p.model->predict_distribution(x);
      ordered_json row;
      row["value"] = schema[*vi].values[v];
      row["prediction"] = schema.class_attribute().values[dist.argmax()];
      row["distribution"] = distribution_json(dist, schema);
      row["explanation"] = explanation_json(*p.model, x);
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["notes"] = p.notes;
    return HttpReply{200, j.dump()};
  });
}

HttpReply AdvisorService::reload() {
  return guarded([&] {
    auto snap = registry_.reload();
    ordered_json j;
    j["loaded"] = snap->models.size();
    j["errors"] = snap->errors;
    return HttpReply{200, j.dump()};
  });
}

void AdvisorService::install_routes() {
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get("/models", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_models()); });
  server_->Post("/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, predict(req.body));
  });
  server_->Post("/whatif", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, whatif(req.body));
  });
  server_->Post("/admin/reload", [this, send](const httplib::Request&, httplib::Response& res) { send(res, reload()); });
  server_->set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, error_reply(500, "internal error"));
  });
}

bool AdvisorService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int AdvisorService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool AdvisorService::listen_after_bind() { return server_->listen_after_bind(); }

void AdvisorService::stop() {
  if (server_) server_->stop();
}

}  // namespace bridgeml
