#pragma once

#include "gmpnoma/gmp.hpp"
#include "gmpnoma/spectral.hpp"

namespace gmpnoma {

struct GmpParameters {
  double gamma = 0.0;  // 1 / (N_u + sigma^2 / v_hat)
  double alpha = 0.0;  // v_hat / v_prior
  double theta = 0.0;  // v_hat / sigma^2
  double v_hat = 0.0;  // a-posteriori variance at the fixed point
  double v_s = 0.0;    // N_u v_hat + sigma^2
};

GmpParameters gmp_parameters_from_vhat(int n_users, double prior_var, double noise_var, double v_hat);

// closed-form positive root of (N_u / v) x^2 + (s + N_s - N_u) x - sigma^2 = 0, s = sigma^2 / v
GmpParameters gmp_variance_fixed_point(int n_users, int n_antennas, double prior_var, double noise_var);

// scalar recursion v <- (N_s / (N_u v + sigma^2) + 1/v_prior)^-1 started at v_prior
struct StateEvolution {
  double v_hat = 0.0;
  int iterations = 0;
  bool converged = false;
};
StateEvolution gmp_state_evolution(int n_users, int n_antennas, double prior_var, double noise_var,
                                   double rel_tol = 1e-15, int max_iter = 100000);

// x^s(t) = B x^s(t-1) + c with c = y_scale * y - prior_map * xbar
struct MeanRecursion {
  Matrix b;
  Matrix prior_map;
  double y_scale = 1.0;

  Vector affine_term(const Vector& y, const Vector& prior_means) const;
  Vector fixed_point(const Vector& c) const;
};

// B = -gamma (H H^T - D), c = y - alpha H xbar
MeanRecursion gmp_mean_iteration_matrix(const GmpParameters& params, const ChannelMatrix& channel);

// Exact linear map of the sum-node means once the variances are held at the values
// stored in `state`; B[m,i] = -sum_k h_mk v_km h_ik p_i for i != m.
MeanRecursion gmp_linearized_iteration(const MessageState& state, const SystemScenario& scenario,
                                       const ChannelMatrix& channel);

// Limit of the GMP posterior means under the linearization above (valid when its radius < 1).
Vector gmp_linearized_fixed_point(const MessageState& state, const SystemScenario& scenario,
                                  const ChannelMatrix& channel, const Vector& y);

// x_hat = (theta H^T H + I)^-1 (theta H^T y + alpha xbar)
Vector gmp_fixed_point_closed_form(const GmpParameters& params, const SystemScenario& scenario,
                                   const ChannelMatrix& channel, const Vector& y);

double gmp_rho_asymptotic(const GmpParameters& params, int n_users, int n_antennas);

struct GmpConvergenceEntry {
  double rho_empirical = 0.0;
  bool rho_converged = false;
  double rho_asymptotic = 0.0;
  bool diagonally_dominant = false;
  bool converges = false;
};

GmpConvergenceEntry gmp_convergence_check(const GmpParameters& params, const ChannelMatrix& channel);

}  // namespace gmpnoma
