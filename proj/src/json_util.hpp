#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lanegraph/error.hpp"
#include "lanegraph/graph.hpp"

namespace lanegraph::detail {

inline nlohmann::json parse_json_document(const std::string& document) {
  try {
    return nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorCode::ParseError, "byte " + std::to_string(ex.byte) + ": " + ex.what());
  }
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::ParseError, where + ": missing '" + key + "'");
  if (!it->is_number()) fail(ErrorCode::ParseError, where + ": '" + key + "' is not a number");
  return it->get<double>();
}

inline double optional_number(const nlohmann::json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number_field(obj, key, where);
}

inline NodeId id_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::ParseError, where + ": missing '" + key + "'");
  if (!it->is_number_unsigned()) fail(ErrorCode::ParseError, where + ": '" + key + "' is not an unsigned integer");
  return it->get<NodeId>();
}

inline const nlohmann::json& array_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) fail(ErrorCode::ParseError, where + ": '" + key + "' must be an array");
  return *it;
}

}  // namespace lanegraph::detail
