#pragma once

#include "gmpnoma/common.hpp"

#include <complex>
#include <random>
#include <utility>

namespace gmpnoma {

using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "std::mt19937_64 + std::normal_distribution<double>";

// One detection problem: dimensions, noise level and the per-user Gaussian prior.
class SystemScenario {
 public:
  SystemScenario(int n_users, int n_antennas, double noise_var, Vector prior_means, Vector prior_vars,
                 std::uint64_t seed = 0);

  static SystemScenario scalar_prior(int n_users, int n_antennas, double noise_var, double prior_var,
                                     std::uint64_t seed = 0);

  // Skips the overload check only. Used by tests that need degenerate shapes such as 1x1.
  static SystemScenario unchecked(int n_users, int n_antennas, double noise_var, Vector prior_means,
                                  Vector prior_vars, std::uint64_t seed = 0);

  int n_users() const { return n_users_; }
  int n_antennas() const { return n_antennas_; }
  double noise_var() const { return noise_var_; }
  const Vector& prior_means() const { return prior_means_; }
  const Vector& prior_vars() const { return prior_vars_; }
  std::uint64_t seed() const { return seed_; }
  double load() const { return static_cast<double>(n_users_) / n_antennas_; }

  bool has_scalar_prior() const;
  // throws UnsupportedConfiguration when per-user variances differ
  double scalar_prior_var() const;

  SystemScenario with_prior_means(Vector prior_means) const;

 private:
  struct Unchecked {};
  SystemScenario(Unchecked, int n_users, int n_antennas, double noise_var, Vector prior_means, Vector prior_vars,
                 std::uint64_t seed);

  int n_users_;
  int n_antennas_;
  double noise_var_;
  Vector prior_means_;
  Vector prior_vars_;
  std::uint64_t seed_;
};

class ChannelMatrix {
 public:
  ChannelMatrix(Matrix entries, std::uint64_t seed = 0);

  const Matrix& entries() const { return entries_; }
  std::uint64_t seed() const { return seed_; }
  int n_antennas() const { return static_cast<int>(entries_.rows()); }
  int n_users() const { return static_cast<int>(entries_.cols()); }

 private:
  Matrix entries_;
  std::uint64_t seed_;
};

struct ObservationVector {
  Vector y;
  Vector truth;
};

ChannelMatrix generate_channel(int n_antennas, int n_users, std::uint64_t seed);

ObservationVector sample_observation(const SystemScenario& scenario, const ChannelMatrix& channel,
                                     std::uint64_t seed);

// Prior means consistent with a unit-power source observed through a side channel:
// xbar = v (1/v - 1)(x + n_l) has marginal N(0, 1 - v) and x | xbar ~ N(xbar, v).
// For v >= 1 the prior carries no information and the means are zero.
Vector informative_prior_means(int n_users, double prior_var, std::uint64_t seed);

void check_dimensions(const SystemScenario& scenario, const ChannelMatrix& channel);
void check_dimensions(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y);

struct RealSystem {
  Matrix h;
  Vector y;
  Vector x;
  Vector n;
};

Matrix complex_to_real_embed(const Eigen::MatrixXcd& h);
Vector complex_to_real_embed(const Eigen::VectorXcd& v);
RealSystem complex_to_real_embed(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y, const Eigen::VectorXcd& x,
                                 const Eigen::VectorXcd& n);

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gmpnoma
