#pragma once

// Single place that pulls in nlohmann/json; records serialize through
// ordered_json so that field order is stable across writes.
#include <json.hpp>

#include <optional>
#include <string>

#include "hhi/core/errors.hpp"

namespace hhi {

using Json = nlohmann::ordered_json;

namespace json_detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null())
    throw ValidationError(std::string("missing required field '") + key + "'");
  return *it;
}

template <class T>
T get_required(const Json& j, const char* key) {
  const Json& v = require(j, key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> get_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace json_detail
}  // namespace hhi
