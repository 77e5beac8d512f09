#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace comviewer {

/// Validator for the JSON Schema subset used by the published API schemas:
/// type, properties, required, additionalProperties (boolean or schema),
/// items, enum, anyOf, minimum, maximum, minItems, maxItems and "$ref". A ref is
/// "#/definitions/x" in the same document, or "name.json" /
/// "name.json#/definitions/x" in another registered schema. Unknown
/// keywords are ignored.
class SchemaRegistry {
 public:
  /// Loads every `*.json` file in `dir`; the schema name is the file stem.
  static SchemaRegistry load_dir(const std::filesystem::path& dir);
  void add(const std::string& name, std::string_view schema_json);

  /// Returns human-readable violations; empty means valid. Throws
  /// std::out_of_range for unknown schema names.
  std::vector<std::string> validate(const std::string& name, std::string_view instance_json) const;

  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string> schemas_;
};

}  // namespace comviewer
