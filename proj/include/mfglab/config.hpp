#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mfglab {

// Structured text configuration: '[section.sub]' headers, 'key = value'
// entries, '#' comments. Values: integers, reals, booleans, quoted strings,
// and flat lists '[a, b, c]'. Duplicate keys and malformed lines are parse
// errors with line/column.

struct ConfigError : std::runtime_error {
  int line = 0;
  int col = 0;
  ConfigError(const std::string& message, int line_, int col_)
      : std::runtime_error(message + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

class ConfigNode {
 public:
  using Value = std::variant<long, double, bool, std::string, std::vector<double>,
                             std::vector<std::string>>;

  bool has(const std::string& key) const;
  bool has_section(const std::string& key) const;

  // typed getters; throw naming the full key path when missing/mistyped
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long def) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key, std::vector<double> def) const;

  const ConfigNode& section(const std::string& key) const;
  ConfigNode& child(const std::string& key);

  void set(const std::string& key, Value v, int line, int col);

  // unknown-key rejection: every key/section must have been read
  void check_all_consumed() const;

  std::vector<std::string> keys() const;
  std::vector<std::string> sections() const;
  const std::map<std::string, std::pair<Value, std::pair<int, int>>>& entries() const {
    return values_;
  }

  std::string path;  // for error messages

 private:
  const Value* find(const std::string& key) const;

  std::map<std::string, std::pair<Value, std::pair<int, int>>> values_;
  std::map<std::string, std::shared_ptr<ConfigNode>> children_;
  mutable std::set<std::string> consumed_;
};

ConfigNode parse_config(const std::string& text);
ConfigNode parse_config_file(const std::string& path);

// Normalized echo that parses back to the same tree (used for manifests).
std::string render_config(const ConfigNode& node);

}  // namespace mfglab
