#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <utility>

#include "mhdflux/core.hpp"

namespace mhdflux {

/// Flat key = value text with dotted section names:
///
///   # comment
///   geometry.shape = wall_box
///   grid.cells = 64 64 64
///   sweep.l_cells = 4 8 16 32
///
/// Keys are unique; values are the trimmed remainder of the line.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "config") {
    static const std::regex key_re("[a-z][a-z0-9_]*(\\.[a-z][a-z0-9_]*)+");
    Config c;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = source + ":" + std::to_string(number);
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!std::regex_match(key, key_re)) throw ConfigError(where + ": malformed key '" + key + "' (want section.name)");
      if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
      if (c.index_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      c.index_[key] = c.entries_.size();
      c.entries_.emplace_back(key, value);
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& key) const { return index_.count(key) != 0; }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      entries_[it->second].second = value;
      return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
  }

  std::optional<std::string> raw(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].second;
  }

  std::string text(const std::string& key, const std::string& fallback) const { return raw(key).value_or(fallback); }

  double number(const std::string& key, double fallback) const {
    const auto v = raw(key);
    return v ? to_number(key, *v) : fallback;
  }

  long long integer(const std::string& key, long long fallback) const {
    const auto v = raw(key);
    return v ? to_integer(key, *v) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const auto v = raw(key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(to_number(key, tok));
    return out;
  }

  std::vector<long long> integers(const std::string& key) const {
    std::vector<long long> out;
    const auto v = raw(key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(to_integer(key, tok));
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  static double to_number(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
  }

  static long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace mhdflux
