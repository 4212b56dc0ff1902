// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "dignn/errors.hpp"

namespace dignn {

// Config documents are strict: any key outside `known` is an error.
inline void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                               const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("key '") + key + "': " + e.what());
  }
}

}  // namespace dignn
