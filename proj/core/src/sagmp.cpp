#include "gmpnoma/sagmp.hpp"

#include <cmath>

namespace gmpnoma {

namespace {

using ColView = Eigen::Map<Matrix>;

ColView transposed(RowMatrix& m) { return ColView(m.data(), m.cols(), m.rows()); }

std::uint64_t edges(const ChannelMatrix& c) {
  return static_cast<std::uint64_t>(c.n_users()) * static_cast<std::uint64_t>(c.n_antennas());
}

// sum_m h'_mk x^s_m / v_bar_s_m for every user
Vector frozen_sum(const MessageState& state, const SagmpParameters& params) {
  return params.h_prime.cwiseProduct(params.inv_v_bar_s.replicate(1, params.h_prime.cols()))
      .cwiseProduct(state.x_su)
      .colwise()
      .sum()
      .transpose();
}

}  // namespace

double sagmp_optimal_w(double gamma_tilde, int n_antennas) { return 1.0 / (1.0 + gamma_tilde * n_antennas); }

double sagmp_rho_pred(int n_users, int n_antennas, double gamma_tilde, double w) {
  const ExtremeEigenvalues ev = asymptotic_extreme_eigenvalues(n_users, n_antennas, gamma_tilde);
  return std::max(std::abs(1.0 - w * ev.lambda_min), std::abs(1.0 - w * ev.lambda_max));
}

SagmpParameters sagmp_params(const SystemScenario& scenario, const ChannelMatrix& channel,
                             std::optional<double> w_override, bool exact_lambda, FlopCounter* flops) {
  check_dimensions(scenario, channel);
  if (scenario.n_users() <= scenario.n_antennas()) throw NotOverloaded("SA-GMP requires n_users > n_antennas");
  const double prior_var = scenario.scalar_prior_var();
  if (!(scenario.noise_var() > 0.0)) throw ParameterRange("SA-GMP requires noise_var > 0");
  const int nu = scenario.n_users(), ns = scenario.n_antennas();
  const Matrix& h = channel.entries();

  SagmpParameters p;
  p.theta_tilde = prior_var / scenario.noise_var();
  p.gamma_tilde = 1.0 / (nu + scenario.noise_var() / prior_var);
  p.w = w_override ? *w_override : sagmp_optimal_w(p.gamma_tilde, ns);
  if (!std::isfinite(p.w)) throw ParameterRange("relaxation parameter must be finite");
  p.sqrt_w = std::sqrt(std::max(p.w, 0.0));
  p.rho_pred = sagmp_rho_pred(nu, ns, p.gamma_tilde, p.w);

  const ExtremeEigenvalues ev = asymptotic_extreme_eigenvalues(nu, ns, p.gamma_tilde);
  p.lambda_min_a = ev.lambda_min;
  p.lambda_max_a = ev.lambda_max;
  if (exact_lambda) {
    Matrix a = p.gamma_tilde * (h * h.transpose());
    a.diagonal().array() += 1.0 - p.gamma_tilde * nu;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    p.lambda_min_a = es.eigenvalues().minCoeff();
    p.lambda_max_a = es.eigenvalues().maxCoeff();
    p.lambda_exact = true;
  }
  p.w_out_of_range = !(p.w > 0.0 && p.w < 2.0 / p.lambda_max_a);

  p.v_bar_s = (h.cwiseAbs2() * scenario.prior_vars()).array() + scenario.noise_var();
  p.inv_v_bar_s = p.v_bar_s.cwiseInverse();
  p.h_prime = p.sqrt_w * h;
  if (flops) {
    const std::uint64_t e = edges(channel);
    flops->setup_mul += 3 * e;
    flops->setup_add += e;
  }
  return p;
}

MessageState sagmp_init(const SystemScenario& scenario) { return gmp_init(scenario); }

double sagmp_advance(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                     const Vector& y, const SagmpParameters& params, const StepOptions& opts) {
  check_dimensions(scenario, channel, y);
  const Matrix& h = channel.entries();
  const Index ns = h.rows(), nu = h.cols();
  if (state.x_us.rows() != nu || state.x_us.cols() != ns || state.x_su.rows() != ns || state.x_su.cols() != nu)
    throw DimensionMismatch("message state does not match the scenario");
  if (params.h_prime.rows() != ns || params.h_prime.cols() != nu)
    throw DimensionMismatch("SA-GMP parameters were built for another channel");
  FlopCounter* f = opts.flops;
  const std::uint64_t e = edges(channel);
  const int t = state.iteration + 1;

  // sum nodes: scaled observation minus interference, plus the (w - 1) correction
  const Vector xs_prev = state.x_su.col(0);
  const Vector xs = params.sqrt_w * y - params.h_prime.cwiseProduct(transposed(state.x_us)).rowwise().sum() -
                    (params.w - 1.0) * xs_prev;
  state.x_su = xs.replicate(1, nu);
  if (f) {
    f->mean_mul += e + 2 * static_cast<std::uint64_t>(ns);
    f->mean_add += e + static_cast<std::uint64_t>(ns);
  }
  detail::update_sn_variances(state, scenario, channel, opts);

  // variable nodes: frozen variances in the mean update
  detail::update_vn_variances(state, scenario, channel, opts);
  const Matrix gt =
      params.h_prime.cwiseProduct(params.inv_v_bar_s.replicate(1, nu)).cwiseProduct(state.x_su);
  const Vector gsum =
      scenario.prior_means().cwiseQuotient(scenario.prior_vars()) + gt.colwise().sum().transpose();
  const Vector& v = scenario.prior_vars();
  const RowMatrix old = state.x_us;
  auto xus_t = transposed(state.x_us);
  for (Index k = 0; k < nu; ++k)
    for (Index m = 0; m < ns; ++m) xus_t(m, k) = v[k] * (gsum[k] - gt(m, k));
  const double change = (state.x_us - old).cwiseAbs().maxCoeff();
  if (f) {
    f->mean_mul += 3 * e + static_cast<std::uint64_t>(nu);
    f->mean_add += 3 * e;
  }
  state.iteration = t;
  detail::check_finite(state, t);
  return change;
}

MessageState sagmp_step(MessageState state, const SystemScenario& scenario, const ChannelMatrix& channel,
                        const Vector& y, const SagmpParameters& params, const StepOptions& opts) {
  sagmp_advance(state, scenario, channel, y, params, opts);
  return state;
}

GaussianBelief sagmp_extrinsic(const MessageState& state, const SagmpParameters& params,
                               const SystemScenario& scenario, const ChannelMatrix& channel) {
  if (state.iteration < 1) throw ParameterRange("extrinsic output needs at least one iteration");
  check_dimensions(scenario, channel);
  const Matrix& h = channel.entries();
  GaussianBelief e;
  e.precisions = h.cwiseAbs2().cwiseProduct(state.prec_su).colwise().sum().transpose();
  const Vector s = frozen_sum(state, params);
  e.means.resize(s.size());
  for (Index k = 0; k < s.size(); ++k) {
    const double ve = e.precisions[k] > 0.0 ? 1.0 / e.precisions[k] : 0.0;
    const double contribution = e.precisions[k] > 0.0 ? (scenario.prior_vars()[k] + ve) * s[k] : 0.0;
    e.means[k] = contribution + scenario.prior_means()[k];
  }
  return e;
}

GaussianBelief sagmp_posterior(const MessageState& state, const SagmpParameters& params,
                               const SystemScenario& scenario, const ChannelMatrix& channel, FlopCounter* flops) {
  if (state.iteration < 1) throw ParameterRange("posterior output needs at least one iteration");
  check_dimensions(scenario, channel);
  const Matrix& h = channel.entries();
  GaussianBelief p;
  p.precisions = h.cwiseAbs2().cwiseProduct(state.prec_su).colwise().sum().transpose() +
                 scenario.prior_vars().cwiseInverse();
  const Vector s = frozen_sum(state, params);
  p.means = scenario.prior_vars().cwiseProduct(s + scenario.prior_means().cwiseQuotient(scenario.prior_vars()));
  if (flops) {
    const std::uint64_t e = edges(channel);
    flops->output_mul += 2 * e + 2 * static_cast<std::uint64_t>(h.cols());
    flops->output_add += e;
  }
  if (!p.means.allFinite()) throw DivergenceError(state.iteration, "posterior is not finite");
  return p;
}

MeanRecursion sagmp_mean_iteration_matrix(const SagmpParameters& params, const ChannelMatrix& channel) {
  const Matrix& hp = params.h_prime;
  if (hp.rows() != channel.n_antennas() || hp.cols() != channel.n_users())
    throw DimensionMismatch("SA-GMP parameters were built for another channel");
  MeanRecursion r;
  r.b = -params.gamma_tilde * (hp * hp.transpose());
  r.b.diagonal().array() -= (1.0 - params.gamma_tilde * channel.n_users()) * params.w - 1.0;
  r.prior_map = hp;
  r.y_scale = params.sqrt_w;
  return r;
}

MeanRecursion sagmp_linearized_iteration(const SagmpParameters& params, const SystemScenario& scenario,
                                         const ChannelMatrix& channel) {
  check_dimensions(scenario, channel);
  const Matrix& hp = params.h_prime;
  MeanRecursion r;
  r.b = -(hp * scenario.prior_vars().asDiagonal() * hp.transpose()) * params.inv_v_bar_s.asDiagonal();
  r.b.diagonal().setConstant(-(params.w - 1.0));
  r.prior_map = hp;
  r.y_scale = params.sqrt_w;
  return r;
}

DetectorOutput run_sagmp(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y,
                         const SagmpParameters& params, const RunOptions& opts) {
  if (opts.max_iter < 1) throw ParameterRange("max_iter must be >= 1");
  DetectorOutput out;
  out.state = sagmp_init(scenario);
  MessageState work = out.state;
  for (int t = 1; t <= opts.max_iter; ++t) {
    double change;
    try {
      change = sagmp_advance(work, scenario, channel, y, params, opts.step);
    } catch (const DivergenceError&) {
      out.diverged = true;
      break;
    }
    out.state = work;
    out.iterations = t;
    out.max_change.push_back(change);
    if (opts.observer) opts.observer(out.state);
    if (t > 1 && change < opts.tol) {
      out.converged = true;
      if (opts.stop_on_convergence) break;
    }
  }
  if (out.iterations > 0) {
    out.extrinsic = sagmp_extrinsic(out.state, params, scenario, channel);
    out.posterior = sagmp_posterior(out.state, params, scenario, channel);
  }
  return out;
}

}  // namespace gmpnoma
