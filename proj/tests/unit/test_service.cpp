#include <doctest.h>

#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bridgeml/classifier.hpp"
#include "bridgeml/service.hpp"
#include "bridgeml/synth.hpp"
#include "bridgeml/text.hpp"
#include "helpers.hpp"

using namespace bridgeml;
using nlohmann::json;

namespace {

std::filesystem::path model_dir() {
  auto dir = testing::scratch_dir("service_models");
  auto d = synth_bridges({3000, 12, 0.1});
  auto parts = partition_by(d, "state").parts;
  for (const char* state : {"WA", "VA"}) {
    for (const char* kind : {"dtree", "bayesnet"}) {
      auto m = fit(ClassifierSpec::parse(kind), parts.at(state));
      m.metadata["state"] = state;
      m.metadata["cv_recall"] = "0.8";
      m.metadata["trained_at"] = "2024-01-01";
      write_file_atomic(dir / (std::string(state) + "_" + kind + ".model"), serialize_model(m));
    }
  }
  return dir;
}

json body(const HttpReply& r) { return json::parse(r.body); }

const char* kPredictWa = R"({"state":"WA","kind":"dtree","features":{"material":"concrete","deck_type":"precast",
  "max_span":20,"avg_span":15,"seismic_pga":0.9}})";

}  // namespace

TEST_CASE("model registry") {
  auto dir = model_dir();
  {
    std::ofstream junk(dir / "broken.model");
    junk << "garbage\n";
  }
  AdvisorService svc(dir);
  auto r = body(svc.list_models());
  CHECK(r["models"].size() == 4);
  REQUIRE(r["errors"].size() == 1);
  CHECK(r["errors"][0].get<std::string>().find("broken.model") != std::string::npos);
  const auto& m0 = r["models"][0];
  CHECK(m0.contains("fingerprint"));
  CHECK(m0["cv_recall"].get<double>() == doctest::Approx(0.8));
  CHECK(m0["trained_at"] == "2024-01-01");

  std::filesystem::remove(dir / "WA_bayesnet.model");
  std::filesystem::remove(dir / "broken.model");
  auto after = body(svc.reload());
  CHECK(body(svc.list_models())["models"].size() == 3);
  CHECK(after["errors"].empty());
}

TEST_CASE("predict and explanations") {
  AdvisorService svc(model_dir());
  auto r = svc.predict(kPredictWa);
  REQUIRE(r.status == 200);
  auto j = body(r);
  CHECK(j["distribution"][0]["class"] == "box_beam");
  double sum = 0, prev = 2;
  for (const auto& e : j["distribution"]) {
    sum += e["p"].get<double>();
    CHECK(e["p"].get<double>() <= prev);
    prev = e["p"].get<double>();
  }
  CHECK(sum == doctest::Approx(1.0));
  CHECK(j["explanation"].size() > 0);
  CHECK(j.contains("path"));

  auto bn = body(svc.predict(R"({"state":"WA","kind":"bayesnet","features":{"material":"concrete"}})"));
  CHECK(bn.contains("contributions"));
}

TEST_CASE("endpoint predictions are bit-identical to the library") {
  auto dir = model_dir();
  AdvisorService svc(dir);
  auto model = read_model_file((dir / "WA_bayesnet.model").string());
  const auto& s = model.schema();
  Instance x;
  x.values.assign(s.size(), kMissing);
  x.values[s.index("material")] = double(*s.at("material").index_of("steel"));
  x.values[s.index("max_span")] = 37.5;
  x.values[s.index("seismic_pga")] = 0.31;
  auto lib = model.predict_distribution(x);
  auto j = body(svc.predict(R"({"state":"WA","kind":"bayesnet","features":{"material":"steel","max_span":37.5,"seismic_pga":0.31}})"));
  for (const auto& e : j["distribution"]) {
    const auto c = *s.class_attribute().index_of(e["class"].get<std::string>());
    CHECK(e["p"].get<double>() == lib.p[c]);
  }

  // No features at all: the model's answer for an all-MISSING instance.
  Instance blank;
  blank.values.assign(s.size(), kMissing);
  auto prior = model.predict_distribution(blank);
  auto jp = body(svc.predict(R"({"state":"WA","kind":"bayesnet"})"));
  for (const auto& e : jp["distribution"])
    CHECK(e["p"].get<double>() == prior.p[*s.class_attribute().index_of(e["class"].get<std::string>())]);
}

TEST_CASE("empty registry") {
  AdvisorService svc(testing::scratch_dir("service_empty"));
  auto j = body(svc.list_models());
  CHECK(j["models"].empty());
  CHECK(svc.predict(R"({"state":"WA","kind":"dtree"})").status == 404);
}

TEST_CASE("request errors") {
  AdvisorService svc(model_dir());
  CHECK(svc.predict("{not json").status == 422);
  CHECK(svc.predict("[]").status == 422);
  CHECK(svc.predict(R"({"state":"TX","kind":"dtree"})").status == 404);
  CHECK(svc.predict(R"({"state":"WA","kind":"forest"})").status == 422);
  CHECK(svc.predict(R"({"state":"WA","kind":"dtree","features":{"colour":"red"}})").status == 422);
  CHECK(svc.predict(R"({"state":"WA","kind":"dtree","features":{"max_span":"long"}})").status == 422);

  auto unknown_label = svc.predict(R"({"state":"WA","kind":"dtree","features":{"material":"adobe"}})");
  CHECK(unknown_label.status == 200);
  CHECK(body(unknown_label)["notes"].size() == 1);
  auto nulls = svc.predict(R"({"state":"WA","kind":"dtree","features":{"material":null,"max_span":null}})");
  CHECK(nulls.status == 200);
}

TEST_CASE("seismic lookup from coordinates") {
  auto grid = SeismicGrid::read(testing::data_path("nbi/grid.dat"));
  AdvisorService svc(model_dir(), grid);
  auto r = svc.predict(R"({"state":"WA","kind":"dtree","features":{"lat":47.6,"lon":-122.3,"material":"concrete"}})");
  REQUIRE(r.status == 200);
}

TEST_CASE("what-if varies one nominal attribute") {
  AdvisorService svc(model_dir());
  auto r = svc.whatif(R"({"state":"WA","kind":"dtree","vary":"material","features":{"max_span":20,"seismic_pga":0.1}})");
  REQUIRE(r.status == 200);
  auto j = body(r);
  CHECK(j["rows"].size() == 4);
  CHECK(j["rows"][0]["value"] == "concrete");
  CHECK(j.contains("base"));
  std::set<std::string> predictions;
  for (const auto& r : j["rows"]) predictions.insert(r["prediction"].get<std::string>());
  CHECK(predictions.size() > 1);
  CHECK(svc.whatif(R"({"state":"WA","kind":"dtree","vary":"max_span"})").status == 422);
  CHECK(svc.whatif(R"({"state":"WA","kind":"dtree","vary":"nope"})").status == 422);
}

TEST_CASE("what-if on an attribute the model does not use") {
  auto dir = testing::scratch_dir("service_nomaterial");
  auto d = synth_bridges({3000, 12, 0.1});
  auto wa = partition_by(d, "state").parts.at("WA");
  auto m = fit(ClassifierSpec::parse("dtree"),
               restrict_features(wa, std::vector<std::string>{"deck_type", "max_span", "seismic_pga"}));
  m.metadata["state"] = "WA";
  write_file_atomic(dir / "wa.model", serialize_model(m));
  AdvisorService svc(dir);
  auto r = svc.whatif(R"({"state":"WA","kind":"dtree","vary":"material","features":{"max_span":20,"seismic_pga":0.9}})");
  REQUIRE(r.status == 200);
  auto rows = body(r)["rows"];
  CHECK(rows.size() == 4);
  for (const auto& row : rows) CHECK(row["distribution"] == rows[0]["distribution"]);
}

TEST_CASE("http server under concurrent load with reloads") {
  auto dir = model_dir();
  AdvisorService svc(dir);
  const int port = svc.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server([&] { svc.listen_after_bind(); });

  const std::string expected = svc.predict(kPredictWa).body;
  std::atomic<int> ok{0}, bad{0}, differing{0};
  std::vector<std::thread> clients;
  for (int t = 0; t < 4; ++t) {
    clients.emplace_back([&] {
      httplib::Client cli("127.0.0.1", port);
      for (int i = 0; i < 25; ++i) {
        auto res = cli.Post("/predict", kPredictWa, "application/json");
        if (res && res->status == 200) ++ok;
        else ++bad;
        if (res && res->body != expected) ++differing;
      }
    });
  }
  std::thread reloader([&] {
    httplib::Client cli("127.0.0.1", port);
    for (int i = 0; i < 5; ++i) cli.Post("/admin/reload", "", "application/json");
  });
  for (auto& c : clients) c.join();
  reloader.join();

  httplib::Client cli("127.0.0.1", port);
  auto models = cli.Get("/models");
  REQUIRE(models);
  CHECK(models->status == 200);
  CHECK(json::parse(models->body)["models"].size() == 4);
  auto missing = cli.Post("/predict", R"({"state":"TX","kind":"dtree"})", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  svc.stop();
  server.join();
  CHECK(ok == 100);
  CHECK(bad == 0);
  CHECK(differing == 0);
}
