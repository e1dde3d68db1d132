#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace eagl {

// Value subset sufficient for experiment configs: booleans, integers,
// floats, strings, and flat arrays of those.
struct TomlValue;
using TomlArray = std::vector<TomlValue>;
struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string, TomlArray> v;
};

// Flat key -> value map; keys inside [section] blocks are stored as
// "section.key". Duplicate keys are a ParseError.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::string& path);

// Lookups throw ParseError when the key is missing (no default given) or
// holds the wrong type. Integer keys widen to double where asked.
bool toml_bool(const TomlTable& t, const std::string& key);
bool toml_bool(const TomlTable& t, const std::string& key, bool fallback);
std::int64_t toml_int(const TomlTable& t, const std::string& key);
std::int64_t toml_int(const TomlTable& t, const std::string& key, std::int64_t fallback);
double toml_double(const TomlTable& t, const std::string& key);
double toml_double(const TomlTable& t, const std::string& key, double fallback);
std::string toml_string(const TomlTable& t, const std::string& key);
std::string toml_string(const TomlTable& t, const std::string& key, const std::string& fallback);
std::vector<std::int64_t> toml_int_list(const TomlTable& t, const std::string& key);
std::vector<double> toml_double_list(const TomlTable& t, const std::string& key);
std::vector<std::string> toml_string_list(const TomlTable& t, const std::string& key);
bool toml_has(const TomlTable& t, const std::string& key);

}  // namespace eagl
