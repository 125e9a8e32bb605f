#include "gmpnoma/sim/experiments.hpp"

#include <cmath>

namespace gmpnoma::sim {

namespace {

int int_in(const Config& c, const std::string& key, long long fallback, long long lo, long long hi) {
  const long long v = c.get_int(key, fallback);
  if (v < lo || v > hi) throw c.error(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double positive(const Config& c, const std::string& key, double fallback) {
  const double v = c.get_double(key, fallback);
  if (!(v > 0.0)) throw c.error(key, "must be positive");
  return v;
}

std::vector<double> positive_list(const Config& c, const std::string& key, const std::vector<double>& fallback) {
  auto v = c.get_double_list(key, fallback);
  for (double x : v)
    if (!(x > 0.0)) throw c.error(key, "entries must be positive");
  return v;
}

std::uint64_t seed_of(const Config& c) {
  const long long seed = c.get_int("seed", 1);
  if (seed < 0) throw c.error("seed", "must be non-negative");
  return static_cast<std::uint64_t>(seed);
}

DetectorKind detector_of(const Config& c, const std::string& key, const std::string& value) {
  try {
    return parse_detector(value);
  } catch (const ParameterRange& e) {
    throw c.error(key, e.what());
  }
}

void require_overload(const Config& c, int nu, int ns) {
  if (nu <= ns) throw c.error(c.has("nu") ? "nu" : "ns", "needs nu > ns (overloaded system)");
}

}  // namespace

DetectorKind parse_detector(const std::string& name) {
  if (name == "gmp") return DetectorKind::gmp;
  if (name == "sagmp" || name == "sa-gmp") return DetectorKind::sagmp;
  if (name == "lmmse") return DetectorKind::lmmse;
  if (name == "jacobi") return DetectorKind::jacobi;
  if (name == "richardson") return DetectorKind::richardson;
  throw ParameterRange("unknown detector '" + name + "' (expected gmp, sagmp, lmmse, jacobi or richardson)");
}

std::string to_string(DetectorKind d) {
  switch (d) {
    case DetectorKind::gmp: return "gmp";
    case DetectorKind::sagmp: return "sagmp";
    case DetectorKind::lmmse: return "lmmse";
    case DetectorKind::jacobi: return "jacobi";
    case DetectorKind::richardson: return "richardson";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("nu and ns must be positive");
  if (n_users <= n_antennas) throw NotOverloaded("experiments need nu > ns");
  if (!(noise_var > 0.0)) throw ParameterRange("noise_var must be positive");
  if (prior_var_schedule.empty()) throw ParameterRange("prior_vars must not be empty");
  for (double v : prior_var_schedule)
    if (!(v > 0.0)) throw ParameterRange("prior_vars entries must be positive");
  if (n_trials < 1) throw ParameterRange("trials must be >= 1");
  if (max_iter < 1) throw ParameterRange("max_iter must be >= 1");
  if (!(tol > 0.0)) throw ParameterRange("tol must be positive");
}

ExperimentSpec experiment_from_config(const Config& c) {
  c.require_known({"detector", "nu", "ns", "noise_var", "prior_vars", "trials", "max_iter", "tol", "seed", "out"});
  ExperimentSpec s;
  if (c.has("detector")) s.detector = detector_of(c, "detector", c.get_string("detector"));
  s.n_users = int_in(c, "nu", s.n_users, 1, 1 << 20);
  s.n_antennas = int_in(c, "ns", s.n_antennas, 1, 1 << 20);
  require_overload(c, s.n_users, s.n_antennas);
  s.noise_var = positive(c, "noise_var", s.noise_var);
  s.prior_var_schedule = positive_list(c, "prior_vars", s.prior_var_schedule);
  s.n_trials = int_in(c, "trials", s.n_trials, 1, 1 << 24);
  s.max_iter = int_in(c, "max_iter", s.max_iter, 1, 1 << 24);
  s.tol = positive(c, "tol", s.tol);
  s.base_seed = seed_of(c);
  s.output_path = c.get_string("out", s.output_path);
  s.validate();
  return s;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) { return base_seed + static_cast<std::uint64_t>(trial); }

TrialProblem make_trial(int n_users, int n_antennas, double noise_var, double prior_var, std::uint64_t base_seed,
                        int trial, int schedule_index) {
  const std::uint64_t ts = trial_seed(base_seed, trial);
  const auto j = static_cast<std::uint64_t>(schedule_index);
  auto base = SystemScenario::scalar_prior(n_users, n_antennas, noise_var, prior_var, ts);
  auto scenario = base.with_prior_means(informative_prior_means(n_users, prior_var, mix_seed(ts, 1 + 2 * j)));
  auto channel = generate_channel(n_antennas, n_users, mix_seed(ts, 0));
  auto obs = sample_observation(scenario, channel, mix_seed(ts, 2 + 2 * j));
  return {std::move(scenario), std::move(channel), std::move(obs)};
}

void SweepSpec::validate() const {
  if (betas.empty()) throw ParameterRange("betas must not be empty");
  for (double b : betas)
    if (!(b > 1.0)) throw NotOverloaded("every beta must exceed 1");
  if (n_antennas < 1) throw InvalidDimension("ns must be positive");
  for (double b : betas)
    if (std::lround(b * n_antennas) <= n_antennas)
      throw NotOverloaded("beta too close to 1 for this ns: nu rounds to ns");
  if (!(snr > 0.0)) throw ParameterRange("snr must be positive");
  if (seeds < 1) throw ParameterRange("seeds must be >= 1");
  if (max_iter < 1) throw ParameterRange("max_iter must be >= 1");
  if (!(tol > 0.0)) throw ParameterRange("tol must be positive");
}

SweepSpec sweep_from_config(const Config& c) {
  c.require_known({"betas", "ns", "snr", "seeds", "max_iter", "tol", "seed", "solvers", "out"});
  SweepSpec s;
  s.betas = c.get_double_list("betas", s.betas);
  s.n_antennas = int_in(c, "ns", s.n_antennas, 1, 1 << 20);
  for (double b : s.betas)
    if (!(b > 1.0) || std::lround(b * s.n_antennas) <= s.n_antennas)
      throw c.error("betas", "every beta must exceed 1 and give nu > ns");
  s.snr = positive(c, "snr", s.snr);
  s.seeds = int_in(c, "seeds", s.seeds, 1, 1 << 20);
  s.max_iter = int_in(c, "max_iter", s.max_iter, 1, 1 << 24);
  s.tol = positive(c, "tol", s.tol);
  s.base_seed = seed_of(c);
  s.run_solvers = int_in(c, "solvers", 1, 0, 1) == 1;
  s.output_path = c.get_string("out", s.output_path);
  s.validate();
  return s;
}

void ComplexitySpec::validate() const {
  if (n_users <= n_antennas || n_antennas < 1) throw NotOverloaded("complexity curve needs nu > ns >= 1");
  if (!(noise_var > 0.0)) throw ParameterRange("noise_var must be positive");
  if (prior_vars.empty() || targets.empty()) throw ParameterRange("prior_vars and targets must not be empty");
  for (double v : prior_vars)
    if (!(v > 0.0)) throw ParameterRange("prior_vars entries must be positive");
  for (double t : targets)
    if (!(t > 0.0)) throw ParameterRange("targets are relative MSE gaps and must be positive");
  if (n_trials < 1 || max_iter < 1) throw ParameterRange("trials and max_iter must be >= 1");
  if (detectors.empty()) throw ParameterRange("no detectors selected");
}

ComplexitySpec complexity_from_config(const Config& c) {
  c.require_known({"nu", "ns", "noise_var", "prior_vars", "targets", "trials", "max_iter", "seed", "detectors", "out"});
  ComplexitySpec s;
  s.n_users = int_in(c, "nu", s.n_users, 1, 1 << 20);
  s.n_antennas = int_in(c, "ns", s.n_antennas, 1, 1 << 20);
  require_overload(c, s.n_users, s.n_antennas);
  s.noise_var = positive(c, "noise_var", s.noise_var);
  s.prior_vars = positive_list(c, "prior_vars", s.prior_vars);
  s.targets = positive_list(c, "targets", s.targets);
  s.n_trials = int_in(c, "trials", s.n_trials, 1, 1 << 24);
  s.max_iter = int_in(c, "max_iter", s.max_iter, 1, 1 << 24);
  s.base_seed = seed_of(c);
  if (c.has("detectors")) {
    s.detectors.clear();
    const std::string raw = c.get_string("detectors");
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      const auto comma = raw.find(',', pos);
      std::string item = raw.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      s.detectors.push_back(detector_of(c, "detectors", item));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  s.output_path = c.get_string("out", s.output_path);
  s.validate();
  return s;
}

}  // namespace gmpnoma::sim
