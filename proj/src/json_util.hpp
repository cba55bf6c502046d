#pragma once

// Helpers for the strict JSON readers: every object is checked for unknown
// keys, and shape errors carry the JSON pointer of the offending value.

#include <initializer_list>
#include <string>
#include <string_view>

#include "archevo/errors.hpp"
#include "json.hpp"

namespace archevo::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

inline void expect_keys(const Json& obj, std::string_view where,
                        std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ParseError(std::string(where) + ": expected an object", 0);
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      throw ValidationError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

inline const Json& require(const Json& obj, std::string_view where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string(where) + ": missing key '" + key + "'", 0);
  }
  return *it;
}

inline std::string require_string(const Json& obj, std::string_view where, const char* key) {
  const Json& v = require(obj, where, key);
  if (!v.is_string()) {
    throw ParseError(std::string(where) + "/" + key + ": expected a string", 0);
  }
  return v.get<std::string>();
}

inline bool require_bool(const Json& obj, std::string_view where, const char* key) {
  const Json& v = require(obj, where, key);
  if (!v.is_boolean()) {
    throw ParseError(std::string(where) + "/" + key + ": expected a boolean", 0);
  }
  return v.get<bool>();
}

inline double require_number(const Json& obj, std::string_view where, const char* key) {
  const Json& v = require(obj, where, key);
  if (!v.is_number()) {
    throw ParseError(std::string(where) + "/" + key + ": expected a number", 0);
  }
  return v.get<double>();
}

inline long long require_integer(const Json& obj, std::string_view where, const char* key) {
  const Json& v = require(obj, where, key);
  if (!v.is_number_integer()) {
    throw ParseError(std::string(where) + "/" + key + ": expected an integer", 0);
  }
  return v.get<long long>();
}

inline const Json& require_array(const Json& obj, std::string_view where, const char* key) {
  const Json& v = require(obj, where, key);
  if (!v.is_array()) {
    throw ParseError(std::string(where) + "/" + key + ": expected an array", 0);
  }
  return v;
}

}  // namespace archevo::detail
