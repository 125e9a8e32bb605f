#include "gmpnoma/gmp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gmpnoma {

namespace {

using ConstColView = Eigen::Map<const Matrix>;
using ColView = Eigen::Map<Matrix>;

// x_us is row-major N_u x N_s, so its buffer read column-major is x_us^T with the layout of H
ConstColView transposed(const RowMatrix& m) { return ConstColView(m.data(), m.cols(), m.rows()); }
ColView transposed(RowMatrix& m) { return ColView(m.data(), m.cols(), m.rows()); }

std::uint64_t edges(const ChannelMatrix& c) {
  return static_cast<std::uint64_t>(c.n_users()) * static_cast<std::uint64_t>(c.n_antennas());
}

// p_m = 1 / (sigma^2 + sum_k h_mk^2 / prec_us(k,m)); zero when an incoming variance is infinite
Vector sn_precisions(const RowMatrix& prec_us, const Matrix& h, double noise_var) {
  const auto prec_t = transposed(prec_us);
  Vector p(h.rows());
  for (Index m = 0; m < h.rows(); ++m) {
    double v = noise_var;
    bool infinite = false;
    for (Index k = 0; k < h.cols(); ++k) {
      const double h2 = h(m, k) * h(m, k);
      if (h2 == 0.0) continue;
      if (prec_t(m, k) == 0.0) {
        infinite = true;
        break;
      }
      v += h2 / prec_t(m, k);
    }
    p[m] = (infinite || v == std::numeric_limits<double>::infinity()) ? 0.0 : 1.0 / v;
  }
  return p;
}

// P_k = 1/v_k + sum_m h_mk^2 p_m
Vector vn_total_precisions(const Vector& p, const Matrix& h, const Vector& prior_vars) {
  return prior_vars.cwiseInverse() + h.cwiseAbs2().transpose() * p;
}

// prec_us(k,m) = P_k - h_mk^2 p_m
void fill_vn_precisions(RowMatrix& prec_us, const Vector& total, const Vector& p, const Matrix& h) {
  auto prec_t = transposed(prec_us);
  for (Index k = 0; k < h.cols(); ++k)
    for (Index m = 0; m < h.rows(); ++m) prec_t(m, k) = total[k] - h(m, k) * h(m, k) * p[m];
}

}  // namespace

Matrix MessageState::v_su() const {
  return prec_su.unaryExpr([](double p) { return p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity(); });
}

Matrix MessageState::v_us() const {
  return prec_us.unaryExpr([](double p) { return p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity(); });
}

VarianceTrack::VarianceTrack(const SystemScenario& scenario, const ChannelMatrix& channel, int max_iter,
                             double rel_tol) {
  check_dimensions(scenario, channel);
  if (max_iter < 1) throw ParameterRange("variance track needs at least one iteration");
  const Matrix& h = channel.entries();
  RowMatrix prec_us = RowMatrix::Zero(scenario.n_users(), scenario.n_antennas());
  for (int t = 1; t <= max_iter; ++t) {
    Vector p = sn_precisions(prec_us, h, scenario.noise_var());
    Vector total = vn_total_precisions(p, h, scenario.prior_vars());
    fill_vn_precisions(prec_us, total, p, h);
    const bool settled = !sn_prec_.empty() &&
                         ((p - sn_prec_.back()).cwiseAbs().array() <= rel_tol * p.cwiseAbs().array()).all() &&
                         ((total - vn_total_.back()).cwiseAbs().array() <= rel_tol * total.array()).all();
    sn_prec_.push_back(std::move(p));
    vn_total_.push_back(std::move(total));
    if (settled) {
      converged_ = true;
      break;
    }
  }
}

const Vector& VarianceTrack::sn_precision(int t) const {
  if (t < 1) throw ParameterRange("variance track is indexed from iteration 1");
  return sn_prec_[static_cast<std::size_t>(std::min(t, length()) - 1)];
}

const Vector& VarianceTrack::vn_total_precision(int t) const {
  if (t < 1) throw ParameterRange("variance track is indexed from iteration 1");
  return vn_total_[static_cast<std::size_t>(std::min(t, length()) - 1)];
}

MessageState gmp_init(const SystemScenario& scenario) {
  MessageState s;
  s.x_su = Matrix::Zero(scenario.n_antennas(), scenario.n_users());
  s.prec_su = Matrix::Zero(scenario.n_antennas(), scenario.n_users());
  s.x_us = RowMatrix::Zero(scenario.n_users(), scenario.n_antennas());
  s.prec_us = RowMatrix::Zero(scenario.n_users(), scenario.n_antennas());
  s.iteration = 0;
  return s;
}

namespace detail {

void update_sn_variances(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                         const StepOptions& opts) {
  const int t = state.iteration + 1;
  const Matrix& h = channel.entries();
  Vector p;
  if (opts.variances) {
    p = opts.variances->sn_precision(t);
  } else {
    p = sn_precisions(state.prec_us, h, scenario.noise_var());
    if (opts.flops) {
      opts.flops->var_mul += edges(channel);
      opts.flops->var_div += edges(channel) + static_cast<std::uint64_t>(h.rows());
      opts.flops->var_add += edges(channel);
    }
  }
  state.prec_su = p.replicate(1, h.cols());
}

void update_vn_variances(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                         const StepOptions& opts) {
  const int t = state.iteration + 1;
  const Matrix& h = channel.entries();
  const Vector p = state.prec_su.col(0);
  Vector total;
  if (opts.variances) {
    total = opts.variances->vn_total_precision(t);
  } else {
    total = vn_total_precisions(p, h, scenario.prior_vars());
    if (opts.flops) {
      opts.flops->var_mul += 2 * edges(channel);
      opts.flops->var_add += edges(channel);
    }
  }
  fill_vn_precisions(state.prec_us, total, p, h);
  if (opts.flops) {
    opts.flops->var_mul += edges(channel);
    opts.flops->var_add += edges(channel);
  }
}

void check_finite(const MessageState& state, int iteration) {
  const auto bad = [](const auto& m) {
    return !m.allFinite() || (m.size() > 0 && m.cwiseAbs().maxCoeff() > kDivergenceThreshold);
  };
  if (bad(state.x_su) || bad(state.x_us)) {
    std::ostringstream os;
    os << "message passing diverged at iteration " << iteration;
    throw DivergenceError(iteration, os.str());
  }
}

}  // namespace detail

double gmp_advance(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                   const Vector& y, const StepOptions& opts) {
  check_dimensions(scenario, channel, y);
  const Matrix& h = channel.entries();
  const Index ns = h.rows(), nu = h.cols();
  if (state.x_us.rows() != nu || state.x_us.cols() != ns || state.x_su.rows() != ns || state.x_su.cols() != nu)
    throw DimensionMismatch("message state does not match the scenario");
  FlopCounter* f = opts.flops;
  const std::uint64_t e = edges(channel);
  const int t = state.iteration + 1;

  // sum nodes: a-posteriori, independent of the destination user
  const Vector xs = y - h.cwiseProduct(transposed(state.x_us)).rowwise().sum();
  state.x_su = xs.replicate(1, nu);
  if (f) {
    f->mean_mul += e;
    f->mean_add += e;
  }
  detail::update_sn_variances(state, scenario, channel, opts);

  // variable nodes: extrinsic, excluding the destination sum node
  detail::update_vn_variances(state, scenario, channel, opts);
  const Matrix gt = h.cwiseProduct(state.prec_su).cwiseProduct(state.x_su);
  const Vector gsum =
      scenario.prior_means().cwiseQuotient(scenario.prior_vars()) + gt.colwise().sum().transpose();
  const RowMatrix v_us = state.prec_us.cwiseInverse();
  const RowMatrix old = state.x_us;
  auto xus_t = transposed(state.x_us);
  const auto vus_t = transposed(v_us);
  for (Index k = 0; k < nu; ++k)
    for (Index m = 0; m < ns; ++m) xus_t(m, k) = (gsum[k] - gt(m, k)) * vus_t(m, k);
  const double change = (state.x_us - old).cwiseAbs().maxCoeff();
  if (f) {
    f->mean_mul += 3 * e + static_cast<std::uint64_t>(nu);
    f->mean_add += 3 * e;
    f->var_div += e;
  }
  state.iteration = t;
  detail::check_finite(state, t);
  return change;
}

MessageState gmp_step(MessageState state, const SystemScenario& scenario, const ChannelMatrix& channel,
                      const Vector& y, const StepOptions& opts) {
  gmp_advance(state, scenario, channel, y, opts);
  return state;
}

GaussianBelief gmp_extrinsic(const MessageState& state, const ChannelMatrix& channel) {
  if (state.iteration < 1) throw ParameterRange("extrinsic output needs at least one iteration");
  const Matrix& h = channel.entries();
  GaussianBelief e;
  e.precisions = h.cwiseAbs2().cwiseProduct(state.prec_su).colwise().sum().transpose();
  const Vector num = h.cwiseProduct(state.prec_su).cwiseProduct(state.x_su).colwise().sum().transpose();
  e.means.resize(num.size());
  for (Index k = 0; k < num.size(); ++k) e.means[k] = e.precisions[k] > 0.0 ? num[k] / e.precisions[k] : 0.0;
  return e;
}

GaussianBelief gmp_posterior(const MessageState& state, const SystemScenario& scenario,
                             const ChannelMatrix& channel) {
  if (state.iteration < 1) throw ParameterRange("posterior output needs at least one iteration");
  check_dimensions(scenario, channel);
  const Matrix& h = channel.entries();
  const Vector prior_prec = scenario.prior_vars().cwiseInverse();
  GaussianBelief p;
  p.precisions = h.cwiseAbs2().cwiseProduct(state.prec_su).colwise().sum().transpose() + prior_prec;
  const Vector num = h.cwiseProduct(state.prec_su).cwiseProduct(state.x_su).colwise().sum().transpose() +
                     scenario.prior_means().cwiseProduct(prior_prec);
  p.means = num.cwiseQuotient(p.precisions);
  if (!p.means.allFinite()) throw DivergenceError(state.iteration, "posterior is not finite");
  return p;
}

DetectorOutput run_gmp(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y,
                       const RunOptions& opts) {
  if (opts.max_iter < 1) throw ParameterRange("max_iter must be >= 1");
  DetectorOutput out;
  out.state = gmp_init(scenario);
  MessageState work = out.state;
  for (int t = 1; t <= opts.max_iter; ++t) {
    double change;
    try {
      change = gmp_advance(work, scenario, channel, y, opts.step);
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
    out.extrinsic = gmp_extrinsic(out.state, channel);
    out.posterior = gmp_posterior(out.state, scenario, channel);
  }
  return out;
}

}  // namespace gmpnoma
