#include "comviewer/schema.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace comviewer {
namespace {

using nlohmann::json;

bool type_matches(const std::string& type, const json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

class Validator {
 public:
  Validator(const std::map<std::string, json>& docs, const json& root) : docs_(docs), root_(&root) {}

  void check(const json& schema, const json& v, const std::string& where) {
    if (schema.contains("$ref")) {
      // "#/definitions/x" stays in the current document; "name.json" and
      // "name.json#/definitions/x" switch to another registered schema.
      const auto ref = schema["$ref"].get<std::string>();
      const auto hash = ref.find('#');
      const json* doc = root_;
      if (hash != 0) {
        std::string file = ref.substr(0, hash);
        if (file.ends_with(".json")) file.resize(file.size() - 5);
        auto it = docs_.find(file);
        if (it == docs_.end()) {
          errors.push_back(where + ": unresolvable $ref " + ref);
          return;
        }
        doc = &it->second;
      }
      const json* target = doc;
      if (hash != std::string::npos && hash + 1 < ref.size()) {
        const std::string prefix = "/definitions/";
        const std::string pointer = ref.substr(hash + 1);
        if (!pointer.starts_with(prefix) || !doc->contains("definitions") ||
            !(*doc)["definitions"].contains(pointer.substr(prefix.size()))) {
          errors.push_back(where + ": unresolvable $ref " + ref);
          return;
        }
        target = &(*doc)["definitions"][pointer.substr(prefix.size())];
      }
      const json* saved = root_;
      root_ = doc;
      check(*target, v, where);
      root_ = saved;
      return;
    }
    if (schema.contains("anyOf")) {
      std::vector<std::string> first;
      bool matched = false;
      for (const auto& alt : schema["anyOf"]) {
        Validator sub(docs_, *root_);
        sub.check(alt, v, where);
        if (sub.errors.empty()) {
          matched = true;
          break;
        }
        if (first.empty()) first = std::move(sub.errors);
      }
      if (!matched) {
        errors.push_back(where + ": no anyOf alternative matches");
        errors.insert(errors.end(), first.begin(), first.end());
      }
    }
    if (schema.contains("type")) {
      const auto& t = schema["type"];
      bool ok = false;
      if (t.is_string()) ok = type_matches(t.get<std::string>(), v);
      else
        for (const auto& alt : t) ok = ok || type_matches(alt.get<std::string>(), v);
      if (!ok) {
        errors.push_back(where + ": expected type " + t.dump() + ", got " + v.type_name());
        return;
      }
    }
    if (schema.contains("enum")) {
      bool found = false;
      for (const auto& e : schema["enum"]) found = found || e == v;
      if (!found) errors.push_back(where + ": value " + v.dump() + " not in enum " + schema["enum"].dump());
    }
    if (v.is_number()) {
      if (schema.contains("minimum") && v.get<double>() < schema["minimum"].get<double>())
        errors.push_back(where + ": " + v.dump() + " below minimum " + schema["minimum"].dump());
      if (schema.contains("maximum") && v.get<double>() > schema["maximum"].get<double>())
        errors.push_back(where + ": " + v.dump() + " above maximum " + schema["maximum"].dump());
    }
    if (v.is_object()) {
      if (schema.contains("required")) {
        for (const auto& key : schema["required"])
          if (!v.contains(key.get<std::string>())) errors.push_back(where + ": missing required '" + key.get<std::string>() + "'");
      }
      const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
      for (const auto& [key, value] : v.items()) {
        if (props && props->contains(key)) {
          check((*props)[key], value, where + "." + key);
        } else if (schema.contains("additionalProperties")) {
          const auto& extra = schema["additionalProperties"];
          if (extra.is_boolean() && !extra.get<bool>()) errors.push_back(where + ": unexpected property '" + key + "'");
          else if (extra.is_object()) check(extra, value, where + "." + key);
        }
      }
    }
    if (v.is_array()) {
      if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
        errors.push_back(where + ": fewer than " + schema["minItems"].dump() + " items");
      if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
        errors.push_back(where + ": more than " + schema["maxItems"].dump() + " items");
      if (schema.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) check(schema["items"], v[i], where + "[" + std::to_string(i) + "]");
    }
  }

  std::vector<std::string> errors;

 private:
  const std::map<std::string, json>& docs_;
  const json* root_;
};

}  // namespace

SchemaRegistry SchemaRegistry::load_dir(const std::filesystem::path& dir) {
  SchemaRegistry reg;
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("schema directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    reg.add(entry.path().stem().string(), ss.str());
  }
  return reg;
}

void SchemaRegistry::add(const std::string& name, std::string_view schema_json) {
  auto parsed = json::parse(schema_json);  // reject broken schemas early
  schemas_[name] = parsed.dump();
}

std::vector<std::string> SchemaRegistry::validate(const std::string& name, std::string_view instance_json) const {
  std::map<std::string, json> docs;
  for (const auto& [n, text] : schemas_) docs.emplace(n, json::parse(text));
  const json& schema = docs.at(name);
  const json instance = json::parse(instance_json, nullptr, false);
  if (instance.is_discarded()) return {"instance is not valid JSON"};
  Validator v(docs, schema);
  v.check(schema, instance, "$");
  return v.errors;
}

std::vector<std::string> SchemaRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : schemas_) out.push_back(name);
  return out;
}

}  // namespace comviewer
