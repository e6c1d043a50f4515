#pragma once

// Small helpers over toml++ shared by the config readers.

#include <toml.hpp>

#include <array>
#include <set>
#include <string>
#include <string_view>

#include "plenreg/errors.hpp"

namespace plenreg::tomlu {

inline toml::table parse(std::string_view text, const std::string& what) {
  try {
    return toml::parse(text, what);
  } catch (const toml::parse_error& e) {
    fail(ErrorCode::ConfigError, what + ": " + std::string(e.description()));
  }
}

inline void allow_keys(const toml::table& t, const std::set<std::string>& keys,
                       const std::string& ctx) {
  for (const auto& [k, v] : t) {
    if (!keys.count(std::string(k.str()))) {
      fail(ErrorCode::ConfigError, "unknown key '" + std::string(k.str()) + "' in " + ctx);
    }
  }
}

inline const toml::table* table(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) fail(ErrorCode::ConfigError, "'" + key + "' must be a table");
  return n->as_table();
}

inline double number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  fail(ErrorCode::ConfigError, "'" + key + "' must be a number");
}

template <typename T>
void read(const toml::table& t, const std::string& key, T& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!n->is_boolean()) fail(ErrorCode::ConfigError, "'" + key + "' must be a boolean");
    out = *n->value<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!n->is_string()) fail(ErrorCode::ConfigError, "'" + key + "' must be a string");
    out = *n->value<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    out = static_cast<T>(number(*n, key));
  } else {
    if (!n->is_integer()) fail(ErrorCode::ConfigError, "'" + key + "' must be an integer");
    const auto v = *n->value<std::int64_t>();
    if constexpr (std::is_unsigned_v<T>) {
      if (v < 0) fail(ErrorCode::ConfigError, "'" + key + "' must be non-negative");
    }
    out = static_cast<T>(v);
  }
}

template <std::size_t N>
bool read_array(const toml::table& t, const std::string& key, std::array<double, N>& out) {
  const toml::node* n = t.get(key);
  if (!n) return false;
  const toml::array* a = n->as_array();
  if (!a || a->size() != N) {
    fail(ErrorCode::ConfigError, "'" + key + "' must be an array of " + std::to_string(N) + " numbers");
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = number(*a->get(i), key);
  return true;
}

}  // namespace plenreg::tomlu
