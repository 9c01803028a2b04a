#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sest/error.hpp"
#include "sest/model.hpp"

namespace sest {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "sest-checkpoint";
constexpr int kVersion = 1;

json vocab_to_json(const LabelVocab& v) { return v.labels(); }

LabelVocab vocab_from_json(const json& j, const char* name) {
  try {
    return LabelVocab::from_labels(j.at(name).get<std::vector<std::string>>(), true);
  } catch (const json::exception& e) {
    throw LoadError(std::string("checkpoint vocabulary '") + name + "' is malformed: " + e.what());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("checkpoint vocabulary '") + name + "': " + e.what());
  }
}

json config_to_json(const ModelConfig& cfg) {
  json j = json::object();
  for (const auto& f : config_fields(cfg)) {
    switch (f.kind) {
      case FieldKind::kInteger: j[f.name] = std::stoull(f.value); break;
      case FieldKind::kReal: j[f.name] = std::stod(f.value); break;
      case FieldKind::kBoolean: j[f.name] = f.value == "true"; break;
      case FieldKind::kText: j[f.name] = f.value; break;
    }
  }
  return j;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  if (v.is_number()) return v.dump();
  throw LoadError("checkpoint config value " + v.dump() + " is not a scalar");
}

ModelConfig config_from_json(const json& j) {
  if (!j.is_object()) throw LoadError("checkpoint config is not an object");
  ModelConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (!set_config_field(cfg, key, scalar_text(value))) throw LoadError("checkpoint config has unknown key '" + key + "'");
    } catch (const ArgumentError& e) {
      throw LoadError(std::string("checkpoint config: ") + e.what());
    }
  }
  return cfg;
}

}  // namespace

std::string checkpoint_to_string(const SestModel& model) {
  const auto& v = model.vocabularies();
  json params = json::object();
  for (const auto& [name, entry] : model.params().entries()) {
    const auto values = entry.tensor.values();
    params[name] = {{"shape", {entry.tensor.rows(), entry.tensor.cols()}},
                    {"values", std::vector<double>(values.begin(), values.end())}};
  }
  json j = {{"format", kFormat},
            {"version", kVersion},
            {"config", config_to_json(model.config())},
            {"vocabularies",
             {{"words", vocab_to_json(v.words)},
              {"chars", vocab_to_json(v.chars)},
              {"constituents", vocab_to_json(v.constituents)},
              {"dependencies", vocab_to_json(v.dependencies)},
              {"pos", vocab_to_json(v.pos)}}},
            {"params", std::move(params)}};
  return j.dump() + "\n";
}

SestModel checkpoint_from_string(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw LoadError("checkpoint is empty");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("checkpoint is truncated or malformed: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kFormat) throw LoadError("not a sest checkpoint");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != kVersion) {
    throw LoadError("unsupported checkpoint version (expected " + std::to_string(kVersion) + ")");
  }
  for (const char* key : {"config", "vocabularies", "params"}) {
    if (!j.contains(key)) throw LoadError(std::string("checkpoint has no '") + key + "' section");
  }
  const ModelConfig cfg = config_from_json(j.at("config"));
  const auto& vj = j.at("vocabularies");
  Vocabularies vocabs{vocab_from_json(vj, "words"), vocab_from_json(vj, "chars"),
                      vocab_from_json(vj, "constituents"), vocab_from_json(vj, "dependencies"),
                      vocab_from_json(vj, "pos")};
  SestModel model = [&] {
    try {
      return SestModel(cfg, std::move(vocabs));
    } catch (const ArgumentError& e) {
      throw LoadError(std::string("checkpoint config is invalid: ") + e.what());
    }
  }();

  const auto& pj = j.at("params");
  if (!pj.is_object()) throw LoadError("checkpoint params is not an object");
  for (auto& [name, entry] : model.params().entries()) {
    if (!pj.contains(name)) throw LoadError("checkpoint is missing parameter '" + name + "'");
    const auto& p = pj.at(name);
    std::vector<std::size_t> shape;
    std::vector<double> values;
    try {
      shape = p.at("shape").get<std::vector<std::size_t>>();
      values = p.at("values").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw LoadError("checkpoint parameter '" + name + "' is malformed: " + e.what());
    }
    if (shape.size() != 2 || shape[0] != entry.tensor.rows() || shape[1] != entry.tensor.cols()) {
      throw LoadError("checkpoint parameter '" + name + "' has shape mismatch (expected " +
                      ad::to_string(entry.tensor.shape()) + ")");
    }
    if (values.size() != entry.tensor.size()) {
      throw LoadError("checkpoint parameter '" + name + "' has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(entry.tensor.size()));
    }
    auto dst = entry.tensor.mutable_values();
    std::copy(values.begin(), values.end(), dst.begin());
  }
  for (const auto& [name, _] : pj.items()) {
    if (!model.params().contains(name)) throw LoadError("checkpoint has unexpected parameter '" + name + "'");
  }
  return model;
}

void save(const SestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_string(model);
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

SestModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot load checkpoint '" + path + "': file not readable");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return checkpoint_from_string(ss.str());
  } catch (const LoadError& e) {
    throw LoadError("cannot load checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace sest
