// Model file layout (text, one record per line):
//
//   bridgeml-model 1
//   kind <dtree|bayesnet|oner>
//   spec <kind[:k=v,...]>
//   seed <integer>
//   meta <count>
//   <key> <value...>            (count lines, keys sorted)
//   schema <line count>
//   <schema sidecar lines>
//   fingerprint <16 hex digits>
//   body
//   <kind-specific records>
//   end

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bridgeml/bayesnet.hpp"
#include "bridgeml/classifier.hpp"
#include "bridgeml/dataset_io.hpp"
#include "bridgeml/dtree.hpp"
#include "bridgeml/errors.hpp"
#include "bridgeml/oner.hpp"
#include "bridgeml/serial.hpp"
#include "bridgeml/text.hpp"

namespace bridgeml {

namespace {

constexpr std::string_view kMagic = "bridgeml-model";
constexpr int kVersion = 1;

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model: unexpected end of file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string rest_after(const std::string& line, std::string_view key) {
  if (line.rfind(std::string(key) + " ", 0) != 0) throw DataError("model: expected '" + std::string(key) + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

void save_model(const TrainedModel& m, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "kind " << to_string(m.kind()) << '\n';
  out << "spec " << m.spec().to_string() << '\n';
  out << "seed " << m.spec().seed << '\n';
  out << "meta " << m.metadata.size() << '\n';
  for (const auto& [k, v] : m.metadata) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw ConfigError("metadata key/value not representable: '" + k + "'");
    out << k << ' ' << v << '\n';
  }
  auto schema_text = format_schema(m.schema());
  std::size_t lines = 0;
  for (char c : schema_text) lines += c == '\n';
  out << "schema " << lines << '\n' << schema_text;
  out << "fingerprint " << m.fingerprint() << '\n';
  out << "body\n";
  m.model().write_body(out);
  out << "end\n";
}

std::string serialize_model(const TrainedModel& m) {
  std::ostringstream out;
  save_model(m, out);
  return out.str();
}

TrainedModel load_model(std::istream& in) {
  {
    auto magic = next_line(in);
    if (magic != std::string(kMagic) + " " + std::to_string(kVersion))
      throw DataError("not a bridgeml model file (or unsupported version)");
  }
  auto kind = parse_model_kind(rest_after(next_line(in), "kind"));
  auto spec = ClassifierSpec::parse(rest_after(next_line(in), "spec"));
  if (spec.kind != kind) throw DataError("model: spec kind does not match");
  {
    auto seed = parse_int(rest_after(next_line(in), "seed"));
    if (!seed || *seed < 0) throw DataError("model: bad seed");
    spec.seed = static_cast<std::uint64_t>(*seed);
  }
  std::map<std::string, std::string> meta;
  {
    auto n = parse_int(rest_after(next_line(in), "meta"));
    if (!n || *n < 0) throw DataError("model: bad meta count");
    for (long long i = 0; i < *n; ++i) {
      auto line = next_line(in);
      auto sp = line.find(' ');
      if (sp == std::string::npos) meta[line] = "";
      else meta[line.substr(0, sp)] = line.substr(sp + 1);
    }
  }
  Schema schema;
  {
    auto n = parse_int(rest_after(next_line(in), "schema"));
    if (!n || *n < 0) throw DataError("model: bad schema line count");
    std::string text;
    for (long long i = 0; i < *n; ++i) text += next_line(in) + "\n";
    schema = parse_schema(text);
  }
  auto fp = rest_after(next_line(in), "fingerprint");
  if (fp != schema.fingerprint()) throw DataError("model: schema fingerprint does not match stored schema");
  if (next_line(in) != "body") throw DataError("model: expected 'body'");

  std::shared_ptr<const Model> model;
  switch (kind) {
    case ModelKind::dtree: model = std::make_shared<DecisionTree>(DecisionTree::read_body(in, schema)); break;
    case ModelKind::bayesnet: model = std::make_shared<BayesNet>(BayesNet::read_body(in, schema)); break;
    case ModelKind::oner: model = std::make_shared<OneR>(OneR::read_body(in, schema)); break;
  }
  if (next_line(in) != "end") throw DataError("model: expected 'end'");
  TrainedModel m(std::move(schema), std::move(model), std::move(spec));
  m.metadata = std::move(meta);
  return m;
}

TrainedModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model '" + path + "'");
  return load_model(in);
}

}  // namespace bridgeml
