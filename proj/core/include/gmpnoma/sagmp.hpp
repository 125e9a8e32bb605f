#pragma once

#include "gmpnoma/gmp.hpp"
#include "gmpnoma/gmp_theory.hpp"

#include <optional>

namespace gmpnoma {

struct SagmpParameters {
  double gamma_tilde = 0.0;  // 1 / (N_u + 1/snr)
  double theta_tilde = 0.0;  // snr = v_prior / sigma^2
  double w = 1.0;
  double sqrt_w = 1.0;
  double rho_pred = 0.0;     // asymptotic radius of I - wA
  double lambda_min_a = 0.0;
  double lambda_max_a = 0.0;  // used for the range check on w
  bool lambda_exact = false;
  bool w_out_of_range = false;
  Vector v_bar_s;      // sum_k h_mk^2 v_k + sigma^2, frozen for the whole run
  Vector inv_v_bar_s;
  Matrix h_prime;      // sqrt(w) H
};

double sagmp_optimal_w(double gamma_tilde, int n_antennas);
double sagmp_rho_pred(int n_users, int n_antennas, double gamma_tilde, double w);

// w_override outside (0, 2/lambda_max) is accepted but flagged. With exact_lambda the
// range check uses a dense eigensolve of A instead of the asymptotic edge.
SagmpParameters sagmp_params(const SystemScenario& scenario, const ChannelMatrix& channel,
                             std::optional<double> w_override = std::nullopt, bool exact_lambda = false,
                             FlopCounter* flops = nullptr);

MessageState sagmp_init(const SystemScenario& scenario);

double sagmp_advance(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                     const Vector& y, const SagmpParameters& params, const StepOptions& opts = {});

MessageState sagmp_step(MessageState state, const SystemScenario& scenario, const ChannelMatrix& channel,
                        const Vector& y, const SagmpParameters& params, const StepOptions& opts = {});

GaussianBelief sagmp_extrinsic(const MessageState& state, const SagmpParameters& params,
                               const SystemScenario& scenario, const ChannelMatrix& channel);
GaussianBelief sagmp_posterior(const MessageState& state, const SagmpParameters& params,
                               const SystemScenario& scenario, const ChannelMatrix& channel,
                               FlopCounter* flops = nullptr);

// B = -(gamma_tilde H'H'^T + ((1 - gamma_tilde N_u) w - 1) I), c = y' - H' xbar
MeanRecursion sagmp_mean_iteration_matrix(const SagmpParameters& params, const ChannelMatrix& channel);

// The recursion the message passing actually runs (per-antenna v_bar_s, exact diagonal).
// It holds exactly from x^s(1) = y' onwards.
MeanRecursion sagmp_linearized_iteration(const SagmpParameters& params, const SystemScenario& scenario,
                                         const ChannelMatrix& channel);

DetectorOutput run_sagmp(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y,
                         const SagmpParameters& params, const RunOptions& opts = {});

}  // namespace gmpnoma
