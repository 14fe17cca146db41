#pragma once

// key=value configuration files with [section] headers. '#' starts a comment
// line. Keys before the first header belong to the unnamed section "".

#include <charconv>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "swkb/error.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

class ConfigSection {
 public:
  explicit ConfigSection(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, std::string value, std::size_t line = 0) {
    values_[key] = std::move(value);
    lines_[key] = line;
  }

  std::string get_string(const std::string& key, const std::string& fallback = {}) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') fail(key, "expected a number, got '" + v + "'");
    return d;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    long long n = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
    return n;
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    const long long n = get_int(key, static_cast<long long>(fallback));
    if (n < 0) fail(key, "must not be negative");
    return static_cast<std::size_t>(n);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string v = utf8::lower(it->second);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(key, "expected a boolean, got '" + it->second + "'");
  }

  /// Comma-separated list; empty items are dropped.
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::string_view v = it->second;
    while (!v.empty()) {
      const auto comma = v.find(',');
      auto item = detail::trim(v.substr(0, comma));
      if (!item.empty()) out.push_back(std::move(item));
      if (comma == std::string_view::npos) break;
      v.remove_prefix(comma + 1);
    }
    return out;
  }

  /// Rejects keys outside `known`, catching typos early.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) fail(k, "unknown key");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = lines_.find(key);
    const std::string where = name_.empty() ? key : "[" + name_ + "] " + key;
    throw ParseError(where + ": " + what, it == lines_.end() ? 0 : it->second);
  }

  std::string name_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
};

class ConfigFile {
 public:
  /// The named section, empty when absent.
  const ConfigSection& section(const std::string& name) const {
    static const ConfigSection empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
  }

  bool has_section(const std::string& name) const { return sections_.count(name) > 0; }
  ConfigSection& mutable_section(const std::string& name) { return sections_.try_emplace(name, name).first->second; }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : sections_) out.push_back(k);
    return out;
  }

  void require_known_sections(const std::set<std::string>& known) const {
    for (const auto& [k, v] : sections_) {
      if (!known.count(k)) throw ParseError("unknown section [" + k + "]", 0);
    }
  }

 private:
  std::map<std::string, ConfigSection> sections_;
};

inline ConfigFile read_config(std::istream& in) {
  ConfigFile cfg;
  std::string current;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!utf8::is_valid(line)) throw ParseError("invalid UTF-8", no);
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError("malformed section header", no);
      current = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      cfg.mutable_section(current);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", no);
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", no);
    auto& sec = cfg.mutable_section(current);
    if (sec.has(key)) throw ParseError("duplicate key '" + key + "'", no);
    sec.set(key, detail::trim(std::string_view(t).substr(eq + 1)), no);
  }
  return cfg;
}

}  // namespace swkb
