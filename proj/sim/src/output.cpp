#include "gmpnoma/sim/output.hpp"

#include "gmpnoma/common.hpp"
#include "gmpnoma/model.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#ifndef GMPNOMA_VERSION
#define GMPNOMA_VERSION "unknown"
#endif
#ifndef GMPNOMA_GIT_REVISION
#define GMPNOMA_GIT_REVISION "unknown"
#endif

namespace gmpnoma::sim {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto fmt = (v != 0.0 && std::abs(v) < 1e-3) ? std::chars_format::scientific : std::chars_format::general;
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, fmt, 10);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

std::string schedule_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", v);
  return buf;
}

std::string library_version() { return std::string(GMPNOMA_VERSION) + "+" + GMPNOMA_GIT_REVISION; }

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json j;
  j["tool"] = "gmpnoma";
  j["version"] = library_version();
  j["subcommand"] = m.subcommand;
  j["config"] = m.config;
  j["seeds"] = {{"base_seed", m.base_seed}, {"rule", m.seed_rule}, {"rng", kRngName}};
  j["outputs"] = m.outputs;
  j["diverged_trials"] = m.diverged_trials;
  j["wall_time_s"] = m.wall_time_s;
  j["finished_at"] = stamp;
  if (!m.notes.empty()) j["notes"] = m.notes;
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace gmpnoma::sim
