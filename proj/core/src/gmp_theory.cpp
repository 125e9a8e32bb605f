#include "gmpnoma/gmp_theory.hpp"

#include <cmath>

namespace gmpnoma {

namespace {

void require_overloaded(int n_users, int n_antennas) {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("dimensions must be positive");
  if (n_users <= n_antennas) throw NotOverloaded("requires n_users > n_antennas");
}

void require_positive(double prior_var, double noise_var) {
  if (!(prior_var > 0.0) || !std::isfinite(prior_var)) throw ParameterRange("prior variance must be positive");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw ParameterRange("noise variance must be positive");
}

}  // namespace

GmpParameters gmp_parameters_from_vhat(int n_users, double prior_var, double noise_var, double v_hat) {
  GmpParameters p;
  p.v_hat = v_hat;
  p.v_s = n_users * v_hat + noise_var;
  p.gamma = 1.0 / (n_users + noise_var / v_hat);
  p.alpha = v_hat / prior_var;
  p.theta = v_hat / noise_var;
  return p;
}

GmpParameters gmp_variance_fixed_point(int n_users, int n_antennas, double prior_var, double noise_var) {
  require_overloaded(n_users, n_antennas);
  require_positive(prior_var, noise_var);
  const double s = noise_var / prior_var;
  const double b = s + n_antennas - n_users;
  const double disc = std::sqrt(b * b + 4.0 * n_users * s);
  // pick the branch that avoids subtracting nearly equal numbers
  const double v_hat = b < 0.0 ? (disc - b) / (2.0 * n_users / prior_var) : 2.0 * noise_var / (b + disc);
  return gmp_parameters_from_vhat(n_users, prior_var, noise_var, v_hat);
}

StateEvolution gmp_state_evolution(int n_users, int n_antennas, double prior_var, double noise_var, double rel_tol,
                                   int max_iter) {
  require_overloaded(n_users, n_antennas);
  require_positive(prior_var, noise_var);
  StateEvolution se;
  double v = prior_var;
  for (int t = 1; t <= max_iter; ++t) {
    const double next = 1.0 / (n_antennas / (n_users * v + noise_var) + 1.0 / prior_var);
    se.iterations = t;
    const bool done = std::abs(next - v) <= rel_tol * next;
    v = next;
    if (done) {
      se.converged = true;
      break;
    }
  }
  se.v_hat = v;
  return se;
}

Vector MeanRecursion::affine_term(const Vector& y, const Vector& prior_means) const {
  if (y.size() != b.rows() || prior_means.size() != prior_map.cols())
    throw DimensionMismatch("affine term inputs do not match the recursion");
  return y_scale * y - prior_map * prior_means;
}

Vector MeanRecursion::fixed_point(const Vector& c) const {
  const Matrix a = Matrix::Identity(b.rows(), b.cols()) - b;
  return a.partialPivLu().solve(c);
}

MeanRecursion gmp_mean_iteration_matrix(const GmpParameters& params, const ChannelMatrix& channel) {
  const Matrix& h = channel.entries();
  MeanRecursion r;
  r.b = -params.gamma * (h * h.transpose());
  r.b.diagonal().setZero();
  r.prior_map = params.alpha * h;
  r.y_scale = 1.0;
  return r;
}

MeanRecursion gmp_linearized_iteration(const MessageState& state, const SystemScenario& scenario,
                                       const ChannelMatrix& channel) {
  check_dimensions(scenario, channel);
  if (state.iteration < 1 || !(state.prec_us.array() > 0.0).all())
    throw ParameterRange("linearization needs finite variable-node variances");
  const Matrix& h = channel.entries();
  // w(m,k) = h_mk v_{k->m}
  const Matrix w = h.cwiseProduct(state.prec_us.transpose().cwiseInverse());
  const Vector p = state.prec_su.col(0);
  MeanRecursion r;
  r.b = -(w * h.transpose()) * p.asDiagonal();
  r.b.diagonal().setZero();
  r.prior_map = w * scenario.prior_vars().cwiseInverse().asDiagonal();
  r.y_scale = 1.0;
  return r;
}

Vector gmp_linearized_fixed_point(const MessageState& state, const SystemScenario& scenario,
                                  const ChannelMatrix& channel, const Vector& y) {
  const MeanRecursion r = gmp_linearized_iteration(state, scenario, channel);
  const Vector xs = r.fixed_point(r.affine_term(y, scenario.prior_means()));
  MessageState fixed = state;
  fixed.x_su = xs.replicate(1, channel.n_users());
  return gmp_posterior(fixed, scenario, channel).means;
}

Vector gmp_fixed_point_closed_form(const GmpParameters& params, const SystemScenario& scenario,
                                   const ChannelMatrix& channel, const Vector& y) {
  check_dimensions(scenario, channel, y);
  const Matrix& h = channel.entries();
  Matrix a = Matrix::Identity(h.cols(), h.cols());
  a.selfadjointView<Eigen::Lower>().rankUpdate(h.transpose(), params.theta);
  const Vector rhs = params.theta * (h.transpose() * y) + params.alpha * scenario.prior_means();
  return a.llt().solve(rhs);
}

double gmp_rho_asymptotic(const GmpParameters& params, int n_users, int n_antennas) {
  return params.gamma * (n_antennas + 2.0 * std::sqrt(static_cast<double>(n_antennas) * n_users));
}

GmpConvergenceEntry gmp_convergence_check(const GmpParameters& params, const ChannelMatrix& channel) {
  const Matrix& h = channel.entries();
  if (channel.n_users() <= channel.n_antennas()) throw NotOverloaded("convergence check needs n_users > n_antennas");
  Matrix b = params.gamma * (h * h.transpose());
  b.diagonal().setZero();
  GmpConvergenceEntry e;
  const SpectralRadiusEstimate est = spectral_radius_empirical(b);
  e.rho_empirical = est.value;
  e.rho_converged = est.converged;
  e.rho_asymptotic = gmp_rho_asymptotic(params, channel.n_users(), channel.n_antennas());
  e.diagonally_dominant = (b.cwiseAbs().rowwise().sum().array() < 1.0).all();
  e.converges = e.rho_empirical < 1.0;
  return e;
}

}  // namespace gmpnoma
