#include "gmpnoma/cli.hpp"

#include "gmpnoma/sim/config.hpp"
#include "gmpnoma/sim/experiments.hpp"
#include "gmpnoma/sim/output.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace gmpnoma::cli {

namespace fs = std::filesystem;
using sim::Config;

namespace {

constexpr const char* kSeedRule =
    "trial seed = base_seed + trial; channel, prior-mean and noise streams are splitmix64 mixes of the trial seed";

// config keys a subcommand accepts, each exposed as --key
const std::map<std::string, std::vector<std::pair<std::string, std::string>>> kKeys = {
    {"mse",
     {{"detector", "gmp, sagmp, lmmse, jacobi or richardson"},
      {"nu", "number of users"},
      {"ns", "number of antennas"},
      {"noise_var", "noise variance"},
      {"prior_vars", "comma separated prior variance schedule"},
      {"trials", "Monte Carlo trials per schedule value"},
      {"max_iter", "iteration cap"},
      {"tol", "stopping tolerance on the message change"},
      {"seed", "base seed"},
      {"out", "output directory"}}},
    {"sweep",
     {{"betas", "comma separated loads nu/ns"},
      {"ns", "number of antennas"},
      {"snr", "prior variance over noise variance"},
      {"seeds", "channels per load"},
      {"max_iter", "iteration cap"},
      {"tol", "stopping tolerance"},
      {"seed", "base seed"},
      {"solvers", "1 to also run Jacobi and Richardson"},
      {"out", "output directory"}}},
    {"complexity",
     {{"nu", "number of users"},
      {"ns", "number of antennas"},
      {"noise_var", "noise variance"},
      {"prior_vars", "comma separated prior variances"},
      {"targets", "comma separated relative MSE gaps to LMMSE"},
      {"trials", "Monte Carlo trials"},
      {"max_iter", "iteration cap"},
      {"seed", "base seed"},
      {"detectors", "comma separated detectors"},
      {"out", "output directory"}}},
};

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_key_options(CLI::App* sub, const std::string& keyset, Invocation& inv) {
  sub->add_option("-c,--config", inv.config_path, "key = value config file");
  for (const auto& [key, help] : kKeys.at(keyset))
    sub->add_option_function<std::string>(
        "--" + key, [&inv, key = key](const std::string& v) { inv.overrides[key] = v; }, help);
}

Config effective_config(const Invocation& inv) {
  Config c = inv.config_path.empty() ? Config::parse("", "<command line>") : Config::load(inv.config_path);
  for (const auto& [k, v] : inv.overrides) c.set(k, v);
  return c;
}

fs::path prepare_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw sim::FileError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw sim::FileError("cannot write '" + p.string() + "'");
  return f;
}

std::map<std::string, std::string> echo(const sim::ExperimentSpec& s) {
  std::string sched;
  for (double v : s.prior_var_schedule) sched += (sched.empty() ? "" : ",") + sim::format_number(v);
  return {{"detector", sim::to_string(s.detector)},   {"nu", std::to_string(s.n_users)},
          {"ns", std::to_string(s.n_antennas)},       {"noise_var", sim::format_number(s.noise_var)},
          {"prior_vars", sched},                      {"trials", std::to_string(s.n_trials)},
          {"max_iter", std::to_string(s.max_iter)},   {"tol", sim::format_number(s.tol)},
          {"seed", std::to_string(s.base_seed)},      {"out", s.output_path}};
}

int run_mse(const Config& c, std::ostream& out, bool chart) {
  sim::Stopwatch clock;
  const auto spec = sim::experiment_from_config(c);
  const fs::path dir = prepare_dir(spec.output_path);
  sim::RunManifest m;
  m.subcommand = chart ? "mset" : "mse";
  m.config = echo(spec);
  m.base_seed = spec.base_seed;
  m.seed_rule = kSeedRule;
  bool partial = false;
  if (chart) {
    for (const auto& ch : sim::run_mset_chart(spec)) {
      const fs::path p = dir / ("mset_" + sim::to_string(spec.detector) + "_v" + sim::schedule_tag(ch.prior_var) + ".csv");
      auto f = open_out(p);
      sim::write_mset_csv(ch, spec.detector, f);
      m.outputs.push_back(p.filename().string());
      out << p.string() << ": v_out " << sim::format_number(ch.points.back().v_out) << ", v_hat "
          << sim::format_number(ch.v_hat) << ", within 1% after " << ch.iterations_to_1pct << " iterations\n";
    }
  } else {
    for (const auto& tr : sim::run_mse_experiment(spec)) {
      const fs::path p = dir / ("mse_" + sim::to_string(spec.detector) + "_v" + sim::schedule_tag(tr.prior_var) + ".csv");
      auto f = open_out(p);
      sim::write_mse_csv(tr, f);
      m.outputs.push_back(p.filename().string());
      m.diverged_trials += tr.total_diverged;
      if (tr.all_diverged()) {
        partial = true;
        m.notes.push_back("all trials diverged at prior variance " + sim::format_number(tr.prior_var));
      }
      out << p.string() << ": final mse " << sim::format_number(tr.final_mse()) << ", lmmse "
          << sim::format_number(tr.mse_lmmse_exact) << ", diverged " << tr.total_diverged << "/" << tr.n_trials
          << "\n";
    }
  }
  m.wall_time_s = clock.seconds();
  sim::write_manifest(m, dir / (m.subcommand + "_manifest.json"));
  return partial ? kPartialFailure : kOk;
}

int run_sweep(const Config& c, std::ostream& out, std::optional<int> boundary_channels) {
  sim::Stopwatch clock;
  const auto spec = sim::sweep_from_config(c);
  const fs::path dir = prepare_dir(spec.output_path);
  sim::RunManifest m;
  m.subcommand = "sweep";
  m.config = c.values();
  m.base_seed = spec.base_seed;
  m.seed_rule = kSeedRule;
  const auto reports = sim::run_convergence_sweep(spec);
  {
    auto f = open_out(dir / "sweep.csv");
    sim::write_convergence_csv(reports, f);
  }
  m.outputs.push_back("sweep.csv");
  for (const auto& r : reports) {
    m.diverged_trials += r.gmp_diverged + r.sagmp_diverged + r.jacobi_diverged + r.richardson_diverged;
    out << "beta " << sim::format_number(r.beta) << ": rho_gmp " << sim::format_number(r.rho_gmp_emp) << " ("
        << (r.gmp_converges() ? "converges" : "diverges") << "), rho_sagmp " << sim::format_number(r.rho_sagmp_emp)
        << " (" << (r.sagmp_converges() ? "converges" : "diverges") << ")\n";
  }
  if (boundary_channels) {
    const auto b = sim::locate_gmp_boundary(spec.n_antennas, spec.snr, *boundary_channels, spec.base_seed);
    auto f = open_out(dir / "boundary.csv");
    sim::write_boundary_csv(b, f);
    m.outputs.push_back("boundary.csv");
    out << "gmp boundary: beta " << sim::format_number(b.beta_asymptotic) << " (formula), "
        << sim::format_number(b.beta_empirical) << " (sampled)\n";
  }
  m.wall_time_s = clock.seconds();
  sim::write_manifest(m, dir / "sweep_manifest.json");
  return kOk;
}

int run_complexity(const Config& c, std::ostream& out) {
  sim::Stopwatch clock;
  const auto spec = sim::complexity_from_config(c);
  const fs::path dir = prepare_dir(spec.output_path);
  sim::RunManifest m;
  m.subcommand = "complexity";
  m.config = c.values();
  m.base_seed = spec.base_seed;
  m.seed_rule = kSeedRule;
  m.notes.push_back("message passing costs count the mean path; the variance recursion is y-independent and excluded");
  const auto rows = sim::run_complexity_curve(spec);
  {
    auto f = open_out(dir / "complexity.csv");
    sim::write_complexity_csv(rows, f);
  }
  m.outputs.push_back("complexity.csv");
  const bool ordered = sim::complexity_ordered(rows);
  out << "ordering sagmp < richardson < lmmse: " << (ordered ? "holds" : "violated") << "\n";
  m.wall_time_s = clock.seconds();
  sim::write_manifest(m, dir / "complexity_manifest.json");
  return kOk;
}

struct RadiusArgs {
  int nu = 400;
  int ns = 200;
  double snr = 100.0;
  int channels = 1;
  std::uint64_t seed = 1;
};

int run_radius(const RadiusArgs& a, std::ostream& out) {
  if (a.nu <= a.ns) throw NotOverloaded("radius needs nu > ns");
  if (!(a.snr > 0.0) || a.channels < 1) throw ParameterRange("snr and channels must be positive");
  const double noise = 1.0 / a.snr;
  const GmpParameters gp = gmp_variance_fixed_point(a.nu, a.ns, 1.0, noise);
  double gmp_emp = 0.0, sa_emp = 0.0, sa_pred = 0.0, w = 0.0;
  for (int k = 0; k < a.channels; ++k) {
    const auto t = sim::make_trial(a.nu, a.ns, noise, 1.0, a.seed, k, 0);
    gmp_emp += spectral_radius_empirical(gmp_mean_iteration_matrix(gp, t.channel).b).value;
    const SagmpParameters sp = sagmp_params(t.scenario, t.channel);
    sa_emp += spectral_radius_empirical(sagmp_mean_iteration_matrix(sp, t.channel).b).value;
    sa_pred = sp.rho_pred;
    w = sp.w;
  }
  out << "rho_gmp_pred=" << sim::format_number(gmp_rho_asymptotic(gp, a.nu, a.ns)) << "\n"
      << "rho_gmp_emp=" << sim::format_number(gmp_emp / a.channels) << "\n"
      << "rho_sagmp_pred=" << sim::format_number(sa_pred) << "\n"
      << "rho_sagmp_emp=" << sim::format_number(sa_emp / a.channels) << "\n"
      << "w_opt=" << sim::format_number(w) << "\n";
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian message passing detectors for overloaded massive MIMO-NOMA", "gmpnoma"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sim::library_version());

  Invocation mse_inv, mset_inv, sweep_inv, cx_inv;
  auto* mse = app.add_subcommand("mse", "MSE per iteration against the LMMSE references");
  add_key_options(mse, "mse", mse_inv);
  auto* mset = app.add_subcommand("mset", "variable-node variance trajectory (gmp or sagmp)");
  add_key_options(mset, "mse", mset_inv);
  auto* sweep = app.add_subcommand("sweep", "convergence verdicts and spectral radii over a load grid");
  add_key_options(sweep, "sweep", sweep_inv);
  std::optional<int> boundary;
  sweep->add_option_function<int>(
      "--boundary", [&](int n) { boundary = n; }, "also bisect the GMP boundary with this many channels per point");
  auto* cx = app.add_subcommand("complexity", "multiplies needed to reach relative MSE targets");
  add_key_options(cx, "complexity", cx_inv);
  RadiusArgs ra;
  auto* radius = app.add_subcommand("radius", "predicted and sampled spectral radii at one load");
  radius->add_option("--nu", ra.nu, "number of users")->capture_default_str();
  radius->add_option("--ns", ra.ns, "number of antennas")->capture_default_str();
  radius->add_option("--snr", ra.snr, "prior variance over noise variance")->capture_default_str();
  radius->add_option("--channels", ra.channels, "channels averaged for the sampled radii")->capture_default_str();
  radius->add_option("--seed", ra.seed, "base seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*mse) return run_mse(effective_config(mse_inv), out, false);
    if (*mset) return run_mse(effective_config(mset_inv), out, true);
    if (*sweep) return run_sweep(effective_config(sweep_inv), out, boundary);
    if (*cx) return run_complexity(effective_config(cx_inv), out);
    if (*radius) return run_radius(ra, out);
  } catch (const sim::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sim::FileError& e) {
    err << "file error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NotOverloaded& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParameterRange& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnsupportedConfiguration& e) {
    err << "unsupported: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace gmpnoma::cli
