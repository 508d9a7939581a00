#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gst/error.hpp"

namespace gst {

// Ordered "key = value" text, '#' comments. Used for config files, run
// manifests and checkpoint metadata.
class KeyValues {
 public:
  static KeyValues Parse(const std::string& text) {
    KeyValues kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = Trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      }
      kv.Set(Trim(trimmed.substr(0, eq)), Trim(trimmed.substr(eq + 1)));
    }
    return kv;
  }
  static KeyValues Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return Parse(os.str());
  }

  void Set(const std::string& key, const std::string& value) { values_[key] = value; }
  template <typename V>
  void SetNumber(const std::string& key, V v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    values_[key] = os.str();
  }

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string GetString(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double GetDouble(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' is not a number: " + it->second);
    }
  }
  long long GetInt(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' is not an integer: " + it->second);
    }
  }
  bool GetBool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key '" + key + "' is not a boolean: " + it->second);
  }

  // Rejects keys outside `known`.
  template <typename Range>
  void RequireKnown(const Range& known) const {
    for (const auto& [k, v] : values_) {
      bool ok = false;
      for (const auto& name : known) ok = ok || k == name;
      if (!ok) throw ConfigError("unknown config key '" + k + "'");
    }
  }

  void Merge(const KeyValues& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  std::string ToString() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  static std::string Trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace gst
