#include "gmpnoma/model.hpp"

#include <cmath>
#include <sstream>

namespace gmpnoma {

namespace {

void validate_common(int n_users, int n_antennas, double noise_var, const Vector& prior_means,
                     const Vector& prior_vars) {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("scenario dimensions must be positive");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw ParameterRange("noise_var must be finite and >= 0");
  if (prior_means.size() != n_users || prior_vars.size() != n_users)
    throw DimensionMismatch("prior vectors must have length n_users");
  if (!prior_means.allFinite()) throw ParameterRange("prior means must be finite");
  for (Index i = 0; i < prior_vars.size(); ++i)
    if (!(prior_vars[i] > 0.0) || !std::isfinite(prior_vars[i]))
      throw ParameterRange("prior variances must be positive and finite");
}

}  // namespace

SystemScenario::SystemScenario(Unchecked, int n_users, int n_antennas, double noise_var, Vector prior_means,
                               Vector prior_vars, std::uint64_t seed)
    : n_users_(n_users),
      n_antennas_(n_antennas),
      noise_var_(noise_var),
      prior_means_(std::move(prior_means)),
      prior_vars_(std::move(prior_vars)),
      seed_(seed) {
  validate_common(n_users_, n_antennas_, noise_var_, prior_means_, prior_vars_);
}

SystemScenario::SystemScenario(int n_users, int n_antennas, double noise_var, Vector prior_means, Vector prior_vars,
                               std::uint64_t seed)
    : SystemScenario(Unchecked{}, n_users, n_antennas, noise_var, std::move(prior_means), std::move(prior_vars),
                     seed) {
  if (n_users_ <= n_antennas_) {
    std::ostringstream os;
    os << "scenario is not overloaded: n_users=" << n_users_ << " <= n_antennas=" << n_antennas_;
    throw NotOverloaded(os.str());
  }
}

SystemScenario SystemScenario::scalar_prior(int n_users, int n_antennas, double noise_var, double prior_var,
                                            std::uint64_t seed) {
  if (n_users < 1) throw InvalidDimension("scenario dimensions must be positive");
  return SystemScenario(n_users, n_antennas, noise_var, Vector::Zero(n_users), Vector::Constant(n_users, prior_var),
                        seed);
}

SystemScenario SystemScenario::unchecked(int n_users, int n_antennas, double noise_var, Vector prior_means,
                                         Vector prior_vars, std::uint64_t seed) {
  return SystemScenario(Unchecked{}, n_users, n_antennas, noise_var, std::move(prior_means), std::move(prior_vars),
                        seed);
}

bool SystemScenario::has_scalar_prior() const {
  return (prior_vars_.array() == prior_vars_[0]).all();
}

double SystemScenario::scalar_prior_var() const {
  if (!has_scalar_prior()) throw UnsupportedConfiguration("operation requires a scalar prior variance");
  return prior_vars_[0];
}

SystemScenario SystemScenario::with_prior_means(Vector prior_means) const {
  return SystemScenario(Unchecked{}, n_users_, n_antennas_, noise_var_, std::move(prior_means), prior_vars_, seed_);
}

ChannelMatrix::ChannelMatrix(Matrix entries, std::uint64_t seed) : entries_(std::move(entries)), seed_(seed) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw InvalidDimension("channel dimensions must be positive");
  if (!entries_.allFinite()) throw ParameterRange("channel entries must be finite");
}

ChannelMatrix generate_channel(int n_antennas, int n_users, std::uint64_t seed) {
  if (n_antennas < 1 || n_users < 1) throw InvalidDimension("channel dimensions must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix h(n_antennas, n_users);
  for (Index m = 0; m < h.rows(); ++m)
    for (Index k = 0; k < h.cols(); ++k) h(m, k) = normal(rng);
  return ChannelMatrix(std::move(h), seed);
}

void check_dimensions(const SystemScenario& scenario, const ChannelMatrix& channel) {
  if (channel.n_antennas() != scenario.n_antennas() || channel.n_users() != scenario.n_users()) {
    std::ostringstream os;
    os << "channel is " << channel.n_antennas() << "x" << channel.n_users() << " but scenario expects "
       << scenario.n_antennas() << "x" << scenario.n_users();
    throw DimensionMismatch(os.str());
  }
}

void check_dimensions(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y) {
  check_dimensions(scenario, channel);
  if (y.size() != scenario.n_antennas()) throw DimensionMismatch("observation length must equal n_antennas");
}

ObservationVector sample_observation(const SystemScenario& scenario, const ChannelMatrix& channel,
                                     std::uint64_t seed) {
  check_dimensions(scenario, channel);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ObservationVector obs;
  obs.truth.resize(scenario.n_users());
  for (Index i = 0; i < obs.truth.size(); ++i)
    obs.truth[i] = scenario.prior_means()[i] + std::sqrt(scenario.prior_vars()[i]) * normal(rng);
  const double sigma = std::sqrt(scenario.noise_var());
  obs.y = channel.entries() * obs.truth;
  for (Index m = 0; m < obs.y.size(); ++m) obs.y[m] += sigma * normal(rng);
  return obs;
}

Vector informative_prior_means(int n_users, double prior_var, std::uint64_t seed) {
  if (n_users < 1) throw InvalidDimension("n_users must be positive");
  if (!(prior_var > 0.0)) throw ParameterRange("prior variance must be positive");
  Vector means = Vector::Zero(n_users);
  if (prior_var >= 1.0) return means;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(1.0 - prior_var);
  for (Index i = 0; i < means.size(); ++i) means[i] = sd * normal(rng);
  return means;
}

Matrix complex_to_real_embed(const Eigen::MatrixXcd& h) {
  const Index r = h.rows(), c = h.cols();
  Matrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = h.real();
  out.topRightCorner(r, c) = -h.imag();
  out.bottomLeftCorner(r, c) = h.imag();
  out.bottomRightCorner(r, c) = h.real();
  return out;
}

Vector complex_to_real_embed(const Eigen::VectorXcd& v) {
  Vector out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

RealSystem complex_to_real_embed(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y, const Eigen::VectorXcd& x,
                                 const Eigen::VectorXcd& n) {
  if (y.size() != h.rows() || n.size() != h.rows() || x.size() != h.cols())
    throw DimensionMismatch("complex system dimensions are inconsistent");
  return {complex_to_real_embed(h), complex_to_real_embed(y), complex_to_real_embed(x), complex_to_real_embed(n)};
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gmpnoma
