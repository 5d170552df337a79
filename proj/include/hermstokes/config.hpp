#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "hermstokes/errors.hpp"

namespace hermstokes {

namespace detail {

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline void check_config_key(const std::string& key, const std::string& where) {
  const std::size_t dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
      key.find('.', dot + 1) != std::string::npos)
    throw validation_error("config " + where + ": key '" + key +
                           "' must have the form section.key (exactly one dot)");
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
      throw validation_error("config " + where + ": key '" + key +
                             "' contains an invalid character");
}

}  // namespace detail

/**
 * @brief Flat `section.key = value` configuration.
 *
 * One dot of nesting, `#`/`;` comment lines, blank lines ignored. Duplicate
 * keys are rejected so a typo cannot silently shadow an earlier line. Typed
 * getters validate the full value text (no trailing garbage).
 */
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string where = origin + ":" + std::to_string(lineno);
      const std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw validation_error("config " + where + ": expected 'section.key = value'");
      const std::string key = detail::trim(t.substr(0, eq));
      const std::string value = detail::trim(t.substr(eq + 1));
      detail::check_config_key(key, where);
      if (value.empty())
        throw validation_error("config " + where + ": empty value for '" + key + "'");
      if (!cfg.kv_.emplace(key, value).second)
        throw validation_error("config " + where + ": duplicate key '" + key + "'");
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw io_error("config: read failure on '" + path + "'");
    return parse(buf.str(), path);
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  /** @brief Insert or overwrite one entry (used for command-line overrides). */
  void set(const std::string& key, const std::string& value) {
    detail::check_config_key(key, "<override>");
    kv_[key] = value;
  }

  std::string get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw validation_error("config: missing key '" + key + "'");
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : to_double(key, it->second);
  }

  long long get_int(const std::string& key) const { return to_int(key, get_string(key)); }
  long long get_int(const std::string& key, long long dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : to_int(key, it->second);
  }

  std::uint64_t get_uint64(const std::string& key) const {
    return to_uint64(key, get_string(key));
  }
  std::uint64_t get_uint64(const std::string& key, std::uint64_t dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : to_uint64(key, it->second);
  }

  bool get_bool(const std::string& key) const { return to_bool(key, get_string(key)); }
  bool get_bool(const std::string& key, bool dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : to_bool(key, it->second);
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static double to_double(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw validation_error("config: key '" + key + "' is not a number: '" + v + "'");
    return x;
  }
  static long long to_int(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    const long long x = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0')
      throw validation_error("config: key '" + key + "' is not an integer: '" + v + "'");
    return x;
  }
  static std::uint64_t to_uint64(const std::string& key, const std::string& v) {
    if (!v.empty() && v[0] == '-')
      throw validation_error("config: key '" + key + "' must be non-negative: '" + v + "'");
    const char* s = v.c_str();
    char* end = nullptr;
    const unsigned long long x = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0')
      throw validation_error("config: key '" + key + "' is not an integer: '" + v + "'");
    return static_cast<std::uint64_t>(x);
  }
  static bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw validation_error("config: key '" + key + "' is not a bool: '" + v + "'");
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace hermstokes
