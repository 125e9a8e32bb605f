#include "gmpnoma/sim/experiments.hpp"
#include "gmpnoma/sim/output.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace gmpnoma::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialTrace {
  std::vector<double> mse;
  std::vector<double> post_var;
  bool diverged = false;
};

double mse_of(const Vector& estimate, const Vector& truth) {
  return (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
}

TrialTrace run_trial(const ExperimentSpec& spec, const TrialProblem& p) {
  TrialTrace tr;
  const auto& [s, h, obs] = p;
  RunOptions o;
  o.max_iter = spec.max_iter;
  o.tol = spec.tol;
  switch (spec.detector) {
    case DetectorKind::gmp: {
      o.observer = [&](const MessageState& st) {
        const GaussianBelief post = gmp_posterior(st, s, h);
        tr.mse.push_back(mse_of(post.means, obs.truth));
        tr.post_var.push_back(post.variances().mean());
      };
      tr.diverged = run_gmp(s, h, obs.y, o).diverged;
      break;
    }
    case DetectorKind::sagmp: {
      const SagmpParameters params = sagmp_params(s, h);
      o.observer = [&](const MessageState& st) {
        const GaussianBelief post = sagmp_posterior(st, params, s, h);
        tr.mse.push_back(mse_of(post.means, obs.truth));
        tr.post_var.push_back(post.variances().mean());
      };
      tr.diverged = run_sagmp(s, h, obs.y, params, o).diverged;
      break;
    }
    case DetectorKind::lmmse: {
      const LmmseResult r = lmmse_detect(s, h, obs.y);
      tr.mse.push_back(mse_of(r.posterior_means, obs.truth));
      tr.post_var.push_back(r.posterior_vars.mean());
      break;
    }
    case DetectorKind::jacobi:
    case DetectorKind::richardson: {
      IterativeSolverConfig c;
      c.kind = spec.detector == DetectorKind::jacobi ? SolverKind::jacobi : SolverKind::richardson;
      c.tol = spec.tol;
      c.max_iter = spec.max_iter;
      const SolverResult r = solve_normal_equations(c, s, h, obs.y, [&](int, const Vector& x) {
        tr.mse.push_back(mse_of(x, obs.truth));
        tr.post_var.push_back(kNaN);
      });
      tr.diverged = r.diverged;
      break;
    }
  }
  return tr;
}

}  // namespace

bool MseTrace::all_diverged() const { return n_trials > 0 && total_diverged == n_trials; }

double MseTrace::final_mse() const { return mse.empty() ? kNaN : mse.back(); }

std::vector<MseTrace> run_mse_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<MseTrace> out;
  for (std::size_t j = 0; j < spec.prior_var_schedule.size(); ++j) {
    const double v = spec.prior_var_schedule[j];
    std::vector<TrialTrace> trials;
    trials.reserve(spec.n_trials);
    double exact_sum = 0.0;
    for (int t = 0; t < spec.n_trials; ++t) {
      const TrialProblem p =
          make_trial(spec.n_users, spec.n_antennas, spec.noise_var, v, spec.base_seed, t, static_cast<int>(j));
      trials.push_back(run_trial(spec, p));
      exact_sum += lmmse_mse_exact(p.scenario, p.channel);
    }

    MseTrace tr;
    tr.detector = spec.detector;
    tr.prior_var = v;
    tr.n_trials = spec.n_trials;
    tr.mse_lmmse_exact = exact_sum / spec.n_trials;
    tr.mse_lmmse_asymptotic = lmmse_mse_asymptotic(spec.n_users, spec.n_antennas, v, spec.noise_var);
    tr.mse_gmp_fixedpoint = gmp_variance_fixed_point(spec.n_users, spec.n_antennas, v, spec.noise_var).v_hat;

    std::size_t length = 0;
    for (const auto& t : trials) {
      // a diverged run fails in the sweep after its last observed one
      length = std::max(length, t.mse.size() + (t.diverged ? 1 : 0));
      tr.total_diverged += t.diverged ? 1 : 0;
    }
    for (std::size_t it = 0; it < length; ++it) {
      double sum = 0.0, var_sum = 0.0;
      int used = 0, diverged = 0;
      for (const auto& t : trials) {
        if (it >= t.mse.size() && (t.diverged || t.mse.empty())) {
          diverged += t.diverged ? 1 : 0;
          continue;
        }
        const std::size_t k = std::min(it, t.mse.size() - 1);
        sum += t.mse[k];
        var_sum += t.post_var[k];
        ++used;
      }
      tr.mse.push_back(used ? sum / used : kNaN);
      tr.posterior_var.push_back(used ? var_sum / used : kNaN);
      tr.trials_used.push_back(used);
      tr.diverged_trials.push_back(diverged);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

void write_mse_csv(const MseTrace& t, std::ostream& out) {
  out << "detector,v_bar_l,iteration,mse,mse_lmmse_exact,mse_lmmse_asymptotic,mse_gmp_fixedpoint,trials_used,"
         "diverged_trials,mean_posterior_var\n";
  const std::string common_tail = format_number(t.mse_lmmse_exact) + ',' + format_number(t.mse_lmmse_asymptotic) +
                                  ',' + format_number(t.mse_gmp_fixedpoint);
  if (t.mse.empty()) {
    out << to_string(t.detector) << ',' << format_number(t.prior_var) << ",0,nan," << common_tail << ",0,"
        << t.total_diverged << ",nan\n";
    return;
  }
  for (std::size_t i = 0; i < t.mse.size(); ++i)
    out << to_string(t.detector) << ',' << format_number(t.prior_var) << ',' << i + 1 << ','
        << format_number(t.mse[i]) << ',' << common_tail << ',' << t.trials_used[i] << ','
        << t.diverged_trials[i] << ',' << format_number(t.posterior_var[i]) << '\n';
}

}  // namespace gmpnoma::sim
