#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace betamix {

// Flat "key = value" configuration. '#' starts a comment; blank lines are
// ignored; later assignments override earlier ones.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ParseError naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace betamix
