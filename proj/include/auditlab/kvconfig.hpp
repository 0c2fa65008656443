#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "auditlab/error.hpp"

namespace auditlab {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  // "a/b" is accepted so catalog weights can be written as in the design tables.
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = parse_double(text.substr(0, slash), what);
    const double den = parse_double(text.substr(slash + 1), what);
    if (den == 0.0) fail(ErrorKind::config, std::string(what) + ": zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    fail(ErrorKind::config, std::string(what) + ": not a number: '" + std::string(text) + "'");
  return value;
}

inline std::int64_t parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    fail(ErrorKind::config, std::string(what) + ": not an integer: '" + std::string(text) + "'");
  return value;
}

// Flat `key = value` configuration. Lines starting with '#' are comments.
// Accessed keys are tracked so callers can reject unknown (misspelled) keys.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(std::string_view text, std::string_view origin = "<config>") {
    KvConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      const auto line = trim(text.substr(start, end - start));
      start = end + 1;
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        fail(ErrorKind::config, std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty())
        fail(ErrorKind::config, std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static KvConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  // Later entries win.
  void merge(const KvConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::config, "missing config key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(raw(key), key) : fallback;
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? parse_int(raw(key), key) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrorKind::config, key + ": not a boolean: '" + v + "'");
  }
  std::vector<std::string> get_list(const std::string& key, char sep = '|') const {
    if (!has(key)) return {};
    auto items = split(raw(key), sep);
    std::erase_if(items, [](const std::string& s) { return s.empty(); });
    return items;
  }

  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  // Canonical text (sorted keys) used for hashing.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace auditlab
