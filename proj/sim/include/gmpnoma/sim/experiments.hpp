#pragma once

#include "gmpnoma/baselines.hpp"
#include "gmpnoma/sagmp.hpp"
#include "gmpnoma/sim/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmpnoma::sim {

enum class DetectorKind { gmp, sagmp, lmmse, jacobi, richardson };

DetectorKind parse_detector(const std::string& name);  // throws ParameterRange
std::string to_string(DetectorKind d);

struct ExperimentSpec {
  DetectorKind detector = DetectorKind::sagmp;
  int n_users = 400;
  int n_antennas = 100;
  double noise_var = 0.01;
  std::vector<double> prior_var_schedule{1.0};
  int n_trials = 500;
  int max_iter = 50;
  double tol = 1e-8;
  std::uint64_t base_seed = 1;
  std::string output_path = "results";

  void validate() const;
};

// keys: detector nu ns noise_var prior_vars trials max_iter tol seed out
ExperimentSpec experiment_from_config(const Config& config);

// One detection problem of a Monte Carlo run. The channel depends on the trial only;
// priors and the observation are fresh for every schedule entry.
struct TrialProblem {
  SystemScenario scenario;
  ChannelMatrix channel;
  ObservationVector obs;
};
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);
TrialProblem make_trial(int n_users, int n_antennas, double noise_var, double prior_var, std::uint64_t base_seed,
                        int trial, int schedule_index);

// Per-iteration aggregate over trials. Trials that converged early are held at their
// final value; a diverged trial contributes up to its last finite iteration only.
struct MseTrace {
  DetectorKind detector = DetectorKind::sagmp;
  double prior_var = 0.0;
  int n_trials = 0;
  std::vector<double> mse;
  std::vector<double> posterior_var;  // NaN for the linear solvers
  std::vector<int> trials_used;
  std::vector<int> diverged_trials;   // cumulative
  int total_diverged = 0;
  double mse_lmmse_exact = 0.0;       // mean trace formula over the sampled channels
  double mse_lmmse_asymptotic = 0.0;
  double mse_gmp_fixedpoint = 0.0;

  int iterations() const { return static_cast<int>(mse.size()); }
  bool all_diverged() const;
  double final_mse() const;
};

std::vector<MseTrace> run_mse_experiment(const ExperimentSpec& spec);
void write_mse_csv(const MseTrace& trace, std::ostream& out);

struct MsetPoint {
  int iteration = 0;
  double v_in = 0.0;   // mean variable-node message variance entering the sweep (inf at t = 1)
  double v_out = 0.0;  // ... leaving it
  double posterior_var = 0.0;
};

struct MsetChart {
  double prior_var = 0.0;
  double v_hat = 0.0;  // closed-form fixed point
  std::vector<MsetPoint> points;
  int iterations_to_1pct = -1;  // first t with |v_out(t) - v_out(end)| <= 1% of v_out(end)
};

// Variances do not depend on y; each point averages over the channels of n_trials trials.
std::vector<MsetChart> run_mset_chart(const ExperimentSpec& spec);
void write_mset_csv(const MsetChart& chart, DetectorKind detector, std::ostream& out);

struct SweepSpec {
  std::vector<double> betas{1.1, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  int n_antennas = 100;
  double snr = 100.0;  // prior variance 1, noise 1/snr
  int seeds = 3;
  int max_iter = 500;
  double tol = 1e-8;
  std::uint64_t base_seed = 1;
  bool run_solvers = true;  // Jacobi and Richardson runs next to the message passing
  std::string output_path = "results";

  void validate() const;
};
SweepSpec sweep_from_config(const Config& config);

enum class RunOutcome { converged, diverged, undecided };
std::string to_string(RunOutcome r);

struct ConvergenceReport {
  double beta = 0.0;
  int n_users = 0;
  int n_antennas = 0;
  double snr = 0.0;
  int seeds = 0;
  double rho_gmp_pred = 0.0;
  double rho_gmp_emp = 0.0;     // mean over channels
  double rho_sagmp_pred = 0.0;
  double rho_sagmp_emp = 0.0;
  double rho_jacobi_emp = 0.0;  // NaN when solvers are skipped
  int gmp_converged = 0, gmp_diverged = 0;
  int sagmp_converged = 0, sagmp_diverged = 0;
  int jacobi_converged = 0, jacobi_diverged = 0;
  int richardson_converged = 0, richardson_diverged = 0;
  double gmp_decay = 0.0;  // fitted per-iteration factor of the message change, mean over seeds
  double sagmp_decay = 0.0;
  double sagmp_lmmse_error = 0.0;  // worst relative l2 distance to LMMSE over seeds
  double richardson_lmmse_error = 0.0;

  bool gmp_converges() const { return rho_gmp_emp < 1.0; }
  bool sagmp_converges() const { return rho_sagmp_emp < 1.0; }
  bool jacobi_converges() const { return rho_jacobi_emp < 1.0; }
};

std::vector<ConvergenceReport> run_convergence_sweep(const SweepSpec& spec);
void write_convergence_csv(const std::vector<ConvergenceReport>& reports, std::ostream& out);

struct BoundaryEstimate {
  double beta_asymptotic = 0.0;  // predicted GMP radius crosses 1
  double beta_empirical = 0.0;   // mean sampled radius crosses 1
  int n_antennas = 0;
  double snr = 0.0;
  int channels = 0;
  int evaluations = 0;
};

// Bisection over integer N_u at fixed N_s for both radii.
BoundaryEstimate locate_gmp_boundary(int n_antennas, double snr, int channels, std::uint64_t seed,
                                     double beta_lo = 2.0, double beta_hi = 12.0);
void write_boundary_csv(const BoundaryEstimate& b, std::ostream& out);

// exp(slope) of log(values) over the geometric tail. For a decaying sequence the window
// is [1e-11, 1e-3] x first value; for a growing one the second half. NaN if < 5 points.
double fit_decay_rate(const std::vector<double>& values);

struct ComplexitySpec {
  int n_users = 1000;
  int n_antennas = 700;
  double noise_var = 0.01;
  std::vector<double> prior_vars{1.0, 0.1, 0.01, 0.001};
  std::vector<double> targets{1.0, 0.5, 0.2, 0.1, 0.05};  // relative MSE gap to LMMSE
  int n_trials = 3;
  int max_iter = 1000;
  std::uint64_t base_seed = 1;
  std::vector<DetectorKind> detectors{DetectorKind::sagmp, DetectorKind::richardson, DetectorKind::lmmse,
                                      DetectorKind::gmp, DetectorKind::jacobi};
  std::string output_path = "results";

  void validate() const;
};
ComplexitySpec complexity_from_config(const Config& config);

struct ComplexityRow {
  DetectorKind detector = DetectorKind::lmmse;
  double prior_var = 0.0;
  double target_rel = 0.0;
  double target_mse = 0.0;
  double achieved_mse = 0.0;  // NaN when unreached
  int iterations = 0;
  double multiplies = 0.0;
  double adds = 0.0;
  bool reached = false;
  std::string note;
};

std::vector<ComplexityRow> run_complexity_curve(const ComplexitySpec& spec);
void write_complexity_csv(const std::vector<ComplexityRow>& rows, std::ostream& out);

// true when SA-GMP reaches every target and orders SA-GMP < Richardson < LMMSE in multiplies
// wherever Richardson reached it too
bool complexity_ordered(const std::vector<ComplexityRow>& rows);

}  // namespace gmpnoma::sim
