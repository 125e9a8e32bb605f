#include "gmpnoma/sim/experiments.hpp"
#include "gmpnoma/sim/output.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace gmpnoma::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double relative_distance(const Vector& a, const Vector& ref) { return (a - ref).norm() / ref.norm(); }

// mean of the finite entries, NaN if there are none
double finite_mean(const std::vector<double>& v) {
  double sum = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  return n ? sum / n : kNaN;
}

double gmp_rho_pred(int nu, int ns, double snr) {
  return gmp_rho_asymptotic(gmp_variance_fixed_point(nu, ns, 1.0, 1.0 / snr), nu, ns);
}

double gmp_rho_mean(int nu, int ns, double snr, int channels, std::uint64_t seed) {
  const GmpParameters params = gmp_variance_fixed_point(nu, ns, 1.0, 1.0 / snr);
  double sum = 0.0;
  for (int c = 0; c < channels; ++c) {
    const ChannelMatrix h = generate_channel(ns, nu, mix_seed(seed, static_cast<std::uint64_t>(c)));
    sum += spectral_radius_empirical(gmp_mean_iteration_matrix(params, h).b).value;
  }
  return sum / channels;
}

// Smallest integer N_u in [lo, hi] with f(N_u) < 1, given f(lo) >= 1 > f(hi) and f
// roughly decreasing. Returns the crossing interpolated between the last bracket.
template <typename F>
double bisect_users(int lo, int hi, F&& f, int& evaluations) {
  double f_lo = f(lo), f_hi = f(hi);
  evaluations += 2;
  if (!(f_lo >= 1.0 && f_hi < 1.0))
    throw ParameterRange("radius does not cross 1 inside the search bracket");
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const double fm = f(mid);
    ++evaluations;
    if (fm >= 1.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  return lo + (f_lo - 1.0) / (f_lo - f_hi);
}

}  // namespace

std::string to_string(RunOutcome r) {
  switch (r) {
    case RunOutcome::converged: return "converged";
    case RunOutcome::diverged: return "diverged";
    case RunOutcome::undecided: return "undecided";
  }
  return "unknown";
}

double fit_decay_rate(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x) && x > 0.0) v.push_back(x);
  if (v.size() < 5) return kNaN;
  std::vector<std::pair<double, double>> pts;
  if (v.back() < v.front()) {
    const double hi = 1e-3 * v.front(), lo = 1e-11 * v.front();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] <= hi && v[i] >= lo) pts.emplace_back(static_cast<double>(i), std::log(v[i]));
  } else {
    for (std::size_t i = v.size() / 2; i < v.size(); ++i) pts.emplace_back(static_cast<double>(i), std::log(v[i]));
  }
  if (pts.size() < 5) return kNaN;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return std::exp(sxy / sxx);
}

std::vector<ConvergenceReport> run_convergence_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<ConvergenceReport> reports;
  const double noise = 1.0 / spec.snr;
  for (double beta : spec.betas) {
    ConvergenceReport r;
    r.beta = beta;
    r.n_antennas = spec.n_antennas;
    r.n_users = static_cast<int>(std::lround(beta * spec.n_antennas));
    r.snr = spec.snr;
    r.seeds = spec.seeds;
    const GmpParameters gp = gmp_variance_fixed_point(r.n_users, r.n_antennas, 1.0, noise);
    r.rho_gmp_pred = gmp_rho_asymptotic(gp, r.n_users, r.n_antennas);
    r.rho_jacobi_emp = spec.run_solvers ? 0.0 : kNaN;

    std::vector<double> gmp_rho, sa_rho, sa_pred, jac_rho, gmp_decay, sa_decay;
    RunOptions o;
    o.max_iter = spec.max_iter;
    o.tol = spec.tol;
    for (int k = 0; k < spec.seeds; ++k) {
      const TrialProblem p = make_trial(r.n_users, r.n_antennas, noise, 1.0, spec.base_seed, k, 0);
      const auto& [s, h, obs] = p;
      const Vector ref = lmmse_detect(s, h, obs.y).posterior_means;

      gmp_rho.push_back(spectral_radius_empirical(gmp_mean_iteration_matrix(gp, h).b).value);
      const DetectorOutput g = run_gmp(s, h, obs.y, o);
      r.gmp_converged += g.converged ? 1 : 0;
      r.gmp_diverged += g.diverged ? 1 : 0;
      gmp_decay.push_back(fit_decay_rate(g.max_change));

      const SagmpParameters sp = sagmp_params(s, h);
      sa_pred.push_back(sp.rho_pred);
      sa_rho.push_back(spectral_radius_empirical(sagmp_mean_iteration_matrix(sp, h).b).value);
      const DetectorOutput a = run_sagmp(s, h, obs.y, sp, o);
      r.sagmp_converged += a.converged ? 1 : 0;
      r.sagmp_diverged += a.diverged ? 1 : 0;
      sa_decay.push_back(fit_decay_rate(a.max_change));
      if (!a.diverged)
        r.sagmp_lmmse_error = std::max(r.sagmp_lmmse_error, relative_distance(a.posterior.means, ref));

      if (spec.run_solvers) {
        jac_rho.push_back(jacobi_iteration_radius(s, h));
        IterativeSolverConfig c;
        c.tol = spec.tol;
        c.max_iter = spec.max_iter;
        c.kind = SolverKind::jacobi;
        const SolverResult j = solve_normal_equations(c, s, h, obs.y);
        r.jacobi_converged += j.converged ? 1 : 0;
        r.jacobi_diverged += j.diverged ? 1 : 0;
        c.kind = SolverKind::richardson;
        const SolverResult rr = solve_normal_equations(c, s, h, obs.y);
        r.richardson_converged += rr.converged ? 1 : 0;
        r.richardson_diverged += rr.diverged ? 1 : 0;
        if (!rr.diverged)
          r.richardson_lmmse_error = std::max(r.richardson_lmmse_error, relative_distance(rr.solution, ref));
      }
    }
    r.rho_gmp_emp = finite_mean(gmp_rho);
    r.rho_sagmp_emp = finite_mean(sa_rho);
    r.rho_sagmp_pred = finite_mean(sa_pred);
    if (spec.run_solvers) r.rho_jacobi_emp = finite_mean(jac_rho);
    r.gmp_decay = finite_mean(gmp_decay);
    r.sagmp_decay = finite_mean(sa_decay);
    reports.push_back(r);
  }
  return reports;
}

void write_convergence_csv(const std::vector<ConvergenceReport>& reports, std::ostream& out) {
  out << "beta,nu,ns,snr,seeds,rho_gmp_pred,rho_gmp_emp,rho_sagmp_pred,rho_sagmp_emp,rho_jacobi_emp,"
         "gmp_converged,gmp_diverged,sagmp_converged,sagmp_diverged,jacobi_converged,jacobi_diverged,"
         "richardson_converged,richardson_diverged,gmp_decay,sagmp_decay,sagmp_lmmse_error,richardson_lmmse_error\n";
  for (const auto& r : reports)
    out << format_number(r.beta) << ',' << r.n_users << ',' << r.n_antennas << ',' << format_number(r.snr) << ','
        << r.seeds << ',' << format_number(r.rho_gmp_pred) << ',' << format_number(r.rho_gmp_emp) << ','
        << format_number(r.rho_sagmp_pred) << ',' << format_number(r.rho_sagmp_emp) << ','
        << format_number(r.rho_jacobi_emp) << ',' << r.gmp_converged << ',' << r.gmp_diverged << ','
        << r.sagmp_converged << ',' << r.sagmp_diverged << ',' << r.jacobi_converged << ',' << r.jacobi_diverged
        << ',' << r.richardson_converged << ',' << r.richardson_diverged << ',' << format_number(r.gmp_decay) << ','
        << format_number(r.sagmp_decay) << ',' << format_number(r.sagmp_lmmse_error) << ','
        << format_number(r.richardson_lmmse_error) << '\n';
}

BoundaryEstimate locate_gmp_boundary(int n_antennas, double snr, int channels, std::uint64_t seed, double beta_lo,
                                     double beta_hi) {
  if (n_antennas < 1 || channels < 1) throw ParameterRange("ns and channels must be positive");
  if (!(snr > 0.0)) throw ParameterRange("snr must be positive");
  if (!(beta_lo > 1.0 && beta_hi > beta_lo)) throw ParameterRange("need 1 < beta_lo < beta_hi");
  const int lo = static_cast<int>(std::ceil(beta_lo * n_antennas));
  const int hi = static_cast<int>(std::floor(beta_hi * n_antennas));
  BoundaryEstimate b;
  b.n_antennas = n_antennas;
  b.snr = snr;
  b.channels = channels;
  const double ns = n_antennas;
  b.beta_asymptotic =
      bisect_users(lo, hi, [&](int nu) { return gmp_rho_pred(nu, n_antennas, snr); }, b.evaluations) / ns;
  b.beta_empirical =
      bisect_users(lo, hi, [&](int nu) { return gmp_rho_mean(nu, n_antennas, snr, channels, seed); }, b.evaluations) /
      ns;
  return b;
}

void write_boundary_csv(const BoundaryEstimate& b, std::ostream& out) {
  out << "ns,snr,channels,beta_asymptotic,beta_empirical,evaluations\n";
  out << b.n_antennas << ',' << format_number(b.snr) << ',' << b.channels << ',' << format_number(b.beta_asymptotic)
      << ',' << format_number(b.beta_empirical) << ',' << b.evaluations << '\n';
}

}  // namespace gmpnoma::sim
