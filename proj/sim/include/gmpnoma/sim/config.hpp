#pragma once

#include "gmpnoma/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gmpnoma::sim {

// line == 0 means the value did not come from a file line (command line override, missing key)
class ConfigError : public Error {
 public:
  ConfigError(std::string source, int line, const std::string& what);
  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

// The config file could not be opened.
class FileError : public Error {
 public:
  using Error::Error;
};

// Flat "key = value" text. '#' starts a comment, blank lines are ignored,
// list values are comma separated.
class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);  // override, not tied to a line
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::vector<std::string> keys() const;
  const std::string& source() const { return source_; }

  // throws ConfigError naming the first key outside `known`
  void require_known(const std::set<std::string>& known) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;

  // echo of every key with the value as written
  std::map<std::string, std::string> values() const;

  // error pointing at the line that set `key` (line 0 if it came from an override)
  ConfigError error(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& entry(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace gmpnoma::sim
