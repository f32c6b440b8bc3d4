#include "mfglab/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mfglab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_number(const std::string& tok, ConfigNode::Value& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  const bool integral = tok.find_first_of(".eE") == std::string::npos;
  if (integral) {
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end && *end == '\0') {
      out = v;
      return true;
    }
    return false;
  }
  const double v = std::strtod(tok.c_str(), &end);
  if (end && *end == '\0') {
    out = v;
    return true;
  }
  return false;
}

ConfigNode::Value parse_value(const std::string& raw, int line, int col) {
  const std::string tok = trim(raw);
  if (tok.empty()) throw ConfigError("empty value", line, col);
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError("unterminated string", line, col);
    return tok.substr(1, tok.size() - 2);
  }
  if (tok.front() == '[') {
    if (tok.back() != ']') throw ConfigError("unterminated list", line, col);
    std::string inner = tok.substr(1, tok.size() - 2);
    std::vector<double> reals;
    std::vector<std::string> strings;
    bool is_string = false;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string it = trim(item);
      if (it.empty()) throw ConfigError("empty list item", line, col);
      if (it.front() == '"') {
        if (it.size() < 2 || it.back() != '"')
          throw ConfigError("unterminated string in list", line, col);
        strings.push_back(it.substr(1, it.size() - 2));
        is_string = true;
      } else {
        ConfigNode::Value v;
        if (!parse_number(it, v)) throw ConfigError("bad list item '" + it + "'", line, col);
        reals.push_back(std::holds_alternative<long>(v)
                            ? static_cast<double>(std::get<long>(v))
                            : std::get<double>(v));
      }
    }
    if (is_string) {
      if (!reals.empty()) throw ConfigError("mixed list types", line, col);
      return strings;
    }
    return reals;
  }
  ConfigNode::Value v;
  if (!parse_number(tok, v)) throw ConfigError("bad value '" + tok + "'", line, col);
  return v;
}

}  // namespace

bool ConfigNode::has(const std::string& key) const {
  consumed_.insert(key);
  return values_.count(key) > 0;
}

bool ConfigNode::has_section(const std::string& key) const {
  consumed_.insert(key);
  return children_.count(key) > 0;
}

const ConfigNode::Value* ConfigNode::find(const std::string& key) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second.first;
}

long ConfigNode::get_int(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("missing config key '" + path + key + "'");
  if (std::holds_alternative<long>(*v)) return std::get<long>(*v);
  throw std::runtime_error("config key '" + path + key + "' must be an integer");
}

long ConfigNode::get_int(const std::string& key, long def) const {
  return find(key) ? get_int(key) : def;
}

double ConfigNode::get_real(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("missing config key '" + path + key + "'");
  if (std::holds_alternative<double>(*v)) return std::get<double>(*v);
  if (std::holds_alternative<long>(*v)) return static_cast<double>(std::get<long>(*v));
  throw std::runtime_error("config key '" + path + key + "' must be a number");
}

double ConfigNode::get_real(const std::string& key, double def) const {
  return find(key) ? get_real(key) : def;
}

bool ConfigNode::get_bool(const std::string& key, bool def) const {
  const Value* v = find(key);
  if (!v) return def;
  if (std::holds_alternative<bool>(*v)) return std::get<bool>(*v);
  throw std::runtime_error("config key '" + path + key + "' must be a boolean");
}

std::string ConfigNode::get_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("missing config key '" + path + key + "'");
  if (std::holds_alternative<std::string>(*v)) return std::get<std::string>(*v);
  throw std::runtime_error("config key '" + path + key + "' must be a string");
}

std::string ConfigNode::get_string(const std::string& key, const std::string& def) const {
  return find(key) ? get_string(key) : def;
}

std::vector<double> ConfigNode::get_real_list(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("missing config key '" + path + key + "'");
  if (std::holds_alternative<std::vector<double>>(*v)) return std::get<std::vector<double>>(*v);
  if (std::holds_alternative<double>(*v)) return {std::get<double>(*v)};
  if (std::holds_alternative<long>(*v)) return {static_cast<double>(std::get<long>(*v))};
  throw std::runtime_error("config key '" + path + key + "' must be a list of numbers");
}

std::vector<double> ConfigNode::get_real_list(const std::string& key,
                                              std::vector<double> def) const {
  return find(key) ? get_real_list(key) : def;
}

const ConfigNode& ConfigNode::section(const std::string& key) const {
  consumed_.insert(key);
  auto it = children_.find(key);
  if (it == children_.end()) {
    static const ConfigNode empty;
    return empty;
  }
  return *it->second;
}

ConfigNode& ConfigNode::child(const std::string& key) {
  auto it = children_.find(key);
  if (it == children_.end()) {
    auto node = std::make_shared<ConfigNode>();
    node->path = path + key + ".";
    it = children_.emplace(key, std::move(node)).first;
  }
  return *it->second;
}

void ConfigNode::set(const std::string& key, Value v, int line, int col) {
  if (values_.count(key) || children_.count(key))
    throw ConfigError("duplicate key '" + path + key + "'", line, col);
  values_.emplace(key, std::make_pair(std::move(v), std::make_pair(line, col)));
}

void ConfigNode::check_all_consumed() const {
  for (const auto& [key, entry] : values_) {
    if (!consumed_.count(key))
      throw ConfigError("unknown key '" + path + key + "'", entry.second.first,
                        entry.second.second);
  }
  for (const auto& [key, node] : children_) {
    if (!consumed_.count(key)) {
      // report the first entry of the unknown section
      int line = 0, col = 0;
      if (!node->values_.empty()) {
        line = node->values_.begin()->second.second.first;
        col = node->values_.begin()->second.second.second;
      }
      throw ConfigError("unknown section '" + path + key + "'", line, col);
    }
    node->check_all_consumed();
  }
}

std::vector<std::string> ConfigNode::keys() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : values_) out.push_back(key);
  return out;
}

std::vector<std::string> ConfigNode::sections() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : children_) out.push_back(key);
  return out;
}

ConfigNode parse_config(const std::string& text) {
  ConfigNode root;
  ConfigNode* current = &root;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    const std::string t = trim(body);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("unterminated section header", lineno,
                          static_cast<int>(body.find('[')) + 1);
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty()) throw ConfigError("empty section name", lineno, 1);
      current = &root;
      std::stringstream ns(name);
      std::string part;
      while (std::getline(ns, part, '.')) {
        part = trim(part);
        if (part.empty()) throw ConfigError("empty section name component", lineno, 1);
        current = &current->child(part);
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", lineno, 1);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", lineno, 1);
    const int col = static_cast<int>(body.find(key)) + 1;
    current->set(key, parse_value(t.substr(eq + 1), lineno, col), lineno, col);
  }
  return root;
}

ConfigNode parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

void render_node(const ConfigNode& node, const std::string& prefix, std::string& out) {
  for (const auto& [key, entry] : node.entries()) {
    out += key + " = ";
    const auto& v = entry.first;
    if (std::holds_alternative<long>(v)) {
      out += std::to_string(std::get<long>(v));
    } else if (std::holds_alternative<double>(v)) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
    } else if (std::holds_alternative<bool>(v)) {
      out += std::get<bool>(v) ? "true" : "false";
    } else if (std::holds_alternative<std::string>(v)) {
      out += "\"" + std::get<std::string>(v) + "\"";
    } else if (std::holds_alternative<std::vector<double>>(v)) {
      out += "[";
      const auto& list = std::get<std::vector<double>>(v);
      for (std::size_t i = 0; i < list.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", list[i]);
        out += std::string(i ? ", " : "") + buf;
      }
      out += "]";
    } else {
      out += "[";
      const auto& list = std::get<std::vector<std::string>>(v);
      for (std::size_t i = 0; i < list.size(); ++i)
        out += std::string(i ? ", " : "") + "\"" + list[i] + "\"";
      out += "]";
    }
    out += "\n";
  }
  for (const auto& key : node.sections()) {
    out += "\n[" + (prefix.empty() ? key : prefix + "." + key) + "]\n";
    render_node(node.section(key), prefix.empty() ? key : prefix + "." + key, out);
  }
}

}  // namespace

std::string render_config(const ConfigNode& node) {
  std::string out;
  render_node(node, "", out);
  return out;
}

}  // namespace mfglab
