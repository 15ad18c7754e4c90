#pragma once

#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "core/common.hpp"

namespace gva {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

// Rejects keys outside the allowed set; misspelled config fields should fail
// loudly instead of silently using defaults.
inline void check_keys(const Json& obj, const std::string& context,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidArgumentError(context + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw InvalidArgumentError(context + ": unknown key '" + key + "'");
  }
}

template <class T>
T json_require(const Json& obj, const std::string& context, const char* key) {
  if (!obj.contains(key)) {
    throw InvalidArgumentError(context + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidArgumentError(context + ": key '" + std::string(key) + "': " + e.what());
  }
}

template <class T>
T json_optional(const Json& obj, const std::string& context, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidArgumentError(context + ": key '" + std::string(key) + "': " + e.what());
  }
}

inline Vec3 json_vec3(const Json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3) {
    throw InvalidArgumentError(context + ": expected an array of 3 numbers");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!value[i].is_number()) {
      throw InvalidArgumentError(context + ": expected an array of 3 numbers");
    }
    out[i] = value[i].get<double>();
  }
  return out;
}

inline Mat4 json_mat4(const Json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 16) {
    throw InvalidArgumentError(context + ": expected an array of 16 numbers (row-major 4x4)");
  }
  Mat4 out;
  for (int i = 0; i < 16; ++i) {
    if (!value[i].is_number()) {
      throw InvalidArgumentError(context + ": expected an array of 16 numbers (row-major 4x4)");
    }
    out(i / 4, i % 4) = value[i].get<double>();
  }
  return out;
}

}  // namespace gva
