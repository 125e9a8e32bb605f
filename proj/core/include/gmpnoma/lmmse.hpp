#pragma once

#include "gmpnoma/model.hpp"

#include <optional>

namespace gmpnoma {

// Gaussian belief in precision form. A zero precision is the "no information"
// sentinel; variances() turns it into +inf only when materialized.
struct GaussianBelief {
  Vector means;
  Vector precisions;

  Vector variances() const;
};

// Removes the prior from a posterior: 1/v_e = 1/v_post - 1/v_prior and the matching mean.
// Precisions that cancel to within rounding are snapped to the zero sentinel.
GaussianBelief extrinsic_from_posterior(const Vector& post_means, const Vector& post_vars, const Vector& prior_means,
                                        const Vector& prior_vars);

// prior (+) extrinsic
GaussianBelief combine_with_prior(const GaussianBelief& extrinsic, const Vector& prior_means,
                                  const Vector& prior_vars);

struct LmmseResult {
  Vector posterior_means;
  Vector posterior_vars;
  Vector extrinsic_means;
  Vector extrinsic_precisions;

  Vector extrinsic_vars() const;
};

// Cholesky factor for a fixed channel and prior variance, reusable across observations.
// Factors H V H^T + sigma^2 I when N_s < N_u and sigma^-2 H^T H + V^-1 otherwise.
class LmmseFilter {
 public:
  LmmseFilter(const SystemScenario& scenario, const ChannelMatrix& channel);

  Vector posterior_means(const Vector& prior_means, const Vector& y) const;
  const Vector& posterior_vars() const;
  double mse() const;

 private:
  Matrix h_;
  Vector prior_vars_;
  double noise_var_;
  bool observation_side_ = false;
  Eigen::LLT<Matrix> llt_;
  mutable std::optional<Vector> posterior_vars_;
};

LmmseResult lmmse_detect(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y);

double lmmse_mse_exact(const SystemScenario& scenario, const ChannelMatrix& channel);

double lmmse_mse_asymptotic(int n_users, int n_antennas, double prior_var, double noise_var);
double lmmse_mse_asymptotic(const SystemScenario& scenario);

}  // namespace gmpnoma
