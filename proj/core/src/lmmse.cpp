#include "gmpnoma/lmmse.hpp"

#include <cmath>
#include <limits>

namespace gmpnoma {

namespace {

constexpr double kCancellation = 64.0 * std::numeric_limits<double>::epsilon();

Vector materialize(const Vector& precisions) {
  Vector v(precisions.size());
  for (Index i = 0; i < v.size(); ++i)
    v[i] = precisions[i] > 0.0 ? 1.0 / precisions[i] : std::numeric_limits<double>::infinity();
  return v;
}

}  // namespace

Vector GaussianBelief::variances() const { return materialize(precisions); }

Vector LmmseResult::extrinsic_vars() const { return materialize(extrinsic_precisions); }

GaussianBelief extrinsic_from_posterior(const Vector& post_means, const Vector& post_vars, const Vector& prior_means,
                                        const Vector& prior_vars) {
  GaussianBelief e{Vector(post_means.size()), Vector(post_means.size())};
  for (Index i = 0; i < post_means.size(); ++i) {
    const double prior_prec = 1.0 / prior_vars[i];
    double prec = 1.0 / post_vars[i] - prior_prec;
    if (prec <= kCancellation * prior_prec) {
      e.precisions[i] = 0.0;
      e.means[i] = 0.0;
      continue;
    }
    e.precisions[i] = prec;
    e.means[i] = (post_means[i] / post_vars[i] - prior_means[i] * prior_prec) / prec;
  }
  return e;
}

GaussianBelief combine_with_prior(const GaussianBelief& extrinsic, const Vector& prior_means,
                                  const Vector& prior_vars) {
  GaussianBelief p{Vector(prior_means.size()), Vector(prior_means.size())};
  for (Index i = 0; i < p.means.size(); ++i) {
    const double prec = extrinsic.precisions[i] + 1.0 / prior_vars[i];
    p.precisions[i] = prec;
    p.means[i] = (extrinsic.precisions[i] * extrinsic.means[i] + prior_means[i] / prior_vars[i]) / prec;
  }
  return p;
}

LmmseFilter::LmmseFilter(const SystemScenario& scenario, const ChannelMatrix& channel)
    : h_(channel.entries()), prior_vars_(scenario.prior_vars()), noise_var_(scenario.noise_var()) {
  check_dimensions(scenario, channel);
  if (!(noise_var_ > 0.0)) throw ParameterRange("LMMSE requires noise_var > 0");
  // factor whichever of the two equivalent systems is smaller
  observation_side_ = h_.rows() < h_.cols();
  if (observation_side_) {
    Matrix s(h_.rows(), h_.rows());
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(h_ * prior_vars_.cwiseSqrt().asDiagonal());
    s.diagonal().array() += noise_var_;
    llt_.compute(s);
  } else {
    Matrix p(h_.cols(), h_.cols());
    p.setZero();
    p.selfadjointView<Eigen::Lower>().rankUpdate(h_.transpose(), 1.0 / noise_var_);
    p.diagonal() += prior_vars_.cwiseInverse();
    llt_.compute(p);
  }
  if (llt_.info() != Eigen::Success) throw Error("LMMSE system matrix is not positive definite");
}

Vector LmmseFilter::posterior_means(const Vector& prior_means, const Vector& y) const {
  if (prior_means.size() != h_.cols() || y.size() != h_.rows())
    throw DimensionMismatch("LMMSE input lengths do not match the channel");
  if (observation_side_) {
    // xbar + V H^T (H V H^T + sigma^2 I)^-1 (y - H xbar)
    const Vector z = llt_.solve(y - h_ * prior_means);
    return prior_means + prior_vars_.cwiseProduct(h_.transpose() * z);
  }
  Vector rhs = prior_means.cwiseQuotient(prior_vars_) + h_.transpose() * y / noise_var_;
  return llt_.solve(rhs);
}

const Vector& LmmseFilter::posterior_vars() const {
  if (!posterior_vars_) {
    if (observation_side_) {
      // v_k - v_k^2 h_k^T S^-1 h_k with S = L L^T
      Matrix g = h_;
      llt_.matrixL().solveInPlace(g);
      posterior_vars_ = prior_vars_ - prior_vars_.cwiseAbs2().cwiseProduct(g.colwise().squaredNorm().transpose());
    } else {
      // diag(P^-1) = column norms of L^-1
      const Index n = h_.cols();
      Matrix linv = Matrix::Identity(n, n);
      llt_.matrixL().solveInPlace(linv);
      posterior_vars_ = linv.colwise().squaredNorm().transpose();
    }
  }
  return *posterior_vars_;
}

double LmmseFilter::mse() const { return posterior_vars().mean(); }

LmmseResult lmmse_detect(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y) {
  check_dimensions(scenario, channel, y);
  LmmseFilter filter(scenario, channel);
  LmmseResult r;
  r.posterior_means = filter.posterior_means(scenario.prior_means(), y);
  r.posterior_vars = filter.posterior_vars();
  GaussianBelief e =
      extrinsic_from_posterior(r.posterior_means, r.posterior_vars, scenario.prior_means(), scenario.prior_vars());
  r.extrinsic_means = std::move(e.means);
  r.extrinsic_precisions = std::move(e.precisions);
  return r;
}

double lmmse_mse_exact(const SystemScenario& scenario, const ChannelMatrix& channel) {
  return LmmseFilter(scenario, channel).mse();
}

double lmmse_mse_asymptotic(int n_users, int n_antennas, double prior_var, double noise_var) {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("dimensions must be positive");
  if (n_users <= n_antennas) throw NotOverloaded("asymptotic LMMSE MSE requires n_users > n_antennas");
  if (!(prior_var > 0.0) || !(noise_var > 0.0)) throw ParameterRange("variances must be positive");
  const double snr = prior_var / noise_var;
  const double beta = static_cast<double>(n_users) / n_antennas;
  const double rb = std::sqrt(beta);
  const double a = std::sqrt(snr * n_antennas * (1.0 + rb) * (1.0 + rb) + 1.0);
  const double b = std::sqrt(snr * n_antennas * (1.0 - rb) * (1.0 - rb) + 1.0);
  // a - b written without cancellation: (a^2 - b^2) / (a + b)
  const double diff = 4.0 * rb * snr * n_antennas / (a + b);
  return prior_var - noise_var / (4.0 * n_users) * diff * diff;
}

double lmmse_mse_asymptotic(const SystemScenario& scenario) {
  return lmmse_mse_asymptotic(scenario.n_users(), scenario.n_antennas(), scenario.scalar_prior_var(),
                              scenario.noise_var());
}

}  // namespace gmpnoma
