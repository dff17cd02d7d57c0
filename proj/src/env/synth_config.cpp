#include <json.hpp>

#include "activeview/errors.hpp"
#include "activeview/env/synthetic.hpp"

namespace activeview {

namespace {

using nlohmann::json;

template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("classes", c.classes);
  f("groups", c.groups);
  f("views", c.views);
  f("feature_dim", c.feature_dim);
  f("train_per_class", c.train_per_class);
  f("test_per_class", c.test_per_class);
  f("noise", c.noise);
  f("group_signal", c.group_signal);
  f("class_signal", c.class_signal);
  f("seed", c.seed);
}

}  // namespace

SynthConfig parse_synth_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  SynthConfig cfg;
  json known = json::object();
  visit_fields(cfg, [&](const char* key, auto& field) {
    known[key] = true;
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
      field = it->template get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw SchemaError(std::string(key) + ": wrong value type");
    }
  });
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw SchemaError(key + ": unknown config key");
  cfg.validate();
  return cfg;
}

std::string synth_config_json(const SynthConfig& cfg) {
  json j = json::object();
  visit_fields(cfg, [&](const char* key, const auto& v) { j[key] = v; });
  return j.dump();
}

}  // namespace activeview
