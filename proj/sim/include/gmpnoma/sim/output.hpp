#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gmpnoma::sim {

// 10 significant digits, scientific notation below 1e-3 in magnitude.
std::string format_number(double v);

// "1e-02" style tag used in per-schedule file names
std::string schedule_tag(double v);

std::string library_version();

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;
  std::uint64_t base_seed = 0;
  std::string seed_rule;
  std::vector<std::string> outputs;
  int diverged_trials = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> notes;
};

void write_manifest(const RunManifest& m, const std::filesystem::path& path);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace gmpnoma::sim
