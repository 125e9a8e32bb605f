#include "gmpnoma/sim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gmpnoma::sim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_message(const std::string& source, int line, const std::string& what) {
  if (line > 0) return source + ":" + std::to_string(line) + ": " + what;
  return source + ": " + what;
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, const std::string& what)
    : Error(format_message(source, line, what)), source_(std::move(source)), line_(line) {}

Config Config::parse(std::string_view text, std::string source) {
  Config c;
  c.source_ = std::move(source);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(c.source_, line_no, "expected 'key = value', got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(c.source_, line_no, "missing key before '='");
    if (value.empty()) throw ConfigError(c.source_, line_no, "key '" + key + "' has no value");
    if (c.entries_.count(key))
      throw ConfigError(c.source_, line_no,
                        "duplicate key '" + key + "' (first set on line " + std::to_string(c.entries_[key].line) + ")");
    c.entries_[key] = {value, line_no};
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

std::vector<std::string> Config::keys() const {
  std::vector<std::string> k;
  for (const auto& [key, e] : entries_) k.push_back(key);
  return k;
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, e] : entries_)
    if (!known.count(key)) throw ConfigError(source_, e.line, "unknown key '" + key + "'");
}

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_, 0, "missing required key '" + key + "'");
  return it->second;
}

ConfigError Config::error(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  return ConfigError(source_, it == entries_.end() ? 0 : it->second.line, key + ": " + what);
}

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  double v;
  if (!parse_double(entry(key).value, v)) throw error(key, "expected a finite number, got '" + entry(key).value + "'");
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
  long long v;
  if (!parse_int(entry(key).value, v)) throw error(key, "expected an integer, got '" + entry(key).value + "'");
  return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string& raw = entry(key).value;
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const auto comma = raw.find(',', pos);
    const std::string_view item =
        std::string_view(raw).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v;
    if (!parse_double(item, v)) throw error(key, "bad list element '" + std::string(trim(item)) + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_double_list(key) : fallback;
}

std::map<std::string, std::string> Config::values() const {
  std::map<std::string, std::string> m;
  for (const auto& [key, e] : entries_) m[key] = e.value;
  return m;
}

}  // namespace gmpnoma::sim
