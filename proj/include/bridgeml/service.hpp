#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bridgeml/classifier.hpp"
#include "bridgeml/ingest.hpp"

namespace httplib {
class Server;
}

namespace bridgeml {

struct RegistryEntry {
  std::string state;
  std::string kind;
  std::string file;
  std::shared_ptr<const TrainedModel> model;
};

// Immutable view handed to requests; a reload builds a new one.
struct RegistrySnapshot {
  std::map<std::pair<std::string, std::string>, RegistryEntry> models;  // (state, kind)
  std::vector<std::string> errors;  // files that failed to load
};

// Loads every *.model file in a directory. The state comes from the model's `state`
// metadata, falling back to the file stem.
class ModelRegistry {
 public:
  explicit ModelRegistry(std::filesystem::path dir);

  // Rebuilds from disk and swaps the snapshot in. Returns the new snapshot.
  std::shared_ptr<const RegistrySnapshot> reload();
  std::shared_ptr<const RegistrySnapshot> snapshot() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::shared_ptr<const RegistrySnapshot> current_;
};

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

class AdvisorService {
 public:
  AdvisorService(std::filesystem::path model_dir, std::optional<SeismicGrid> grid = std::nullopt);
  ~AdvisorService();

  // Socket-free request handling; the HTTP routes forward here.
  HttpReply list_models() const;
  HttpReply predict(const std::string& body) const;
  HttpReply whatif(const std::string& body) const;
  HttpReply reload();

  // Blocks until stop(). Returns false if the port could not be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

  ModelRegistry& registry() { return registry_; }

 private:
  void install_routes();

  ModelRegistry registry_;
  std::optional<SeismicGrid> grid_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace bridgeml
