#include "gmpnoma/model.hpp"
#include "gmpnoma/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace gmpnoma;

TEST(Scenario, RejectsNonOverloadedShapes) {
  EXPECT_THROW(SystemScenario::scalar_prior(100, 100, 0.1, 1.0), NotOverloaded);
  EXPECT_THROW(SystemScenario::scalar_prior(50, 100, 0.1, 1.0), NotOverloaded);
  EXPECT_NO_THROW(SystemScenario::scalar_prior(101, 100, 0.1, 1.0));
}

TEST(Scenario, RejectsBadPriorsAndDimensions) {
  EXPECT_THROW(SystemScenario(3, 2, 0.1, Vector::Zero(3), Vector::Constant(3, 0.0)), ParameterRange);
  EXPECT_THROW(SystemScenario(3, 2, 0.1, Vector::Zero(3), Vector::Constant(3, INFINITY)), ParameterRange);
  EXPECT_THROW(SystemScenario(3, 2, 0.1, Vector::Zero(2), Vector::Ones(3)), DimensionMismatch);
  EXPECT_THROW(SystemScenario(3, 0, 0.1, Vector::Zero(3), Vector::Ones(3)), InvalidDimension);
}

TEST(Scenario, UncheckedHookAllowsSquareCase) {
  auto s = SystemScenario::unchecked(1, 1, 1.0, Vector::Zero(1), Vector::Ones(1));
  EXPECT_EQ(s.n_users(), 1);
  EXPECT_EQ(s.n_antennas(), 1);
}

TEST(Scenario, ScalarPriorDetection) {
  auto s = SystemScenario::scalar_prior(4, 2, 0.1, 0.5);
  EXPECT_TRUE(s.has_scalar_prior());
  EXPECT_DOUBLE_EQ(s.scalar_prior_var(), 0.5);
  Vector v(4);
  v << 1, 2, 1, 1;
  SystemScenario t(4, 2, 0.1, Vector::Zero(4), v);
  EXPECT_THROW(t.scalar_prior_var(), UnsupportedConfiguration);
}

TEST(Channel, DeterministicGivenSeed) {
  auto a = generate_channel(1, 1, 42);
  auto b = generate_channel(1, 1, 42);
  EXPECT_EQ(a.entries()(0, 0), b.entries()(0, 0));
  auto c = generate_channel(30, 40, 7);
  auto d = generate_channel(30, 40, 7);
  EXPECT_TRUE((c.entries().array() == d.entries().array()).all());
  EXPECT_FALSE((c.entries().array() == generate_channel(30, 40, 8).entries().array()).all());
}

TEST(Channel, RejectsZeroDimension) {
  EXPECT_THROW(generate_channel(0, 4, 1), InvalidDimension);
  EXPECT_THROW(generate_channel(4, 0, 1), InvalidDimension);
}

TEST(Channel, StandardNormalMoments) {
  const auto h = generate_channel(200, 400, 11).entries();
  const double n = static_cast<double>(h.size());
  const double mean = h.mean();
  const double var = (h.array() - mean).square().sum() / (n - 1);
  // standard errors: 1/sqrt(n) for the mean, sqrt(2/n) for the variance
  EXPECT_LT(std::abs(mean), 5.0 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1.0), 5.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(var - 1.0), 0.05);
}

TEST(Channel, ConditionNumberFollowsSingularValueEdges) {
  // beta = 1.5: edge ratio (1 + sqrt(2/3)) / (1 - sqrt(2/3)) = 9.90
  const double predicted = condition_number_asymptotic(1.5);
  EXPECT_NEAR(predicted, 9.898979, 1e-5);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const double k = condition_number_empirical(generate_channel(100, 150, 100 + s));
    EXPECT_LT(std::abs(k - predicted) / predicted, 0.2) << "seed " << s;
    sum += k;
  }
  EXPECT_LT(std::abs(sum / 10 - predicted) / predicted, 0.2);
  // the footnote form (1 + 1/beta)/(1 - 1/beta) = 5 is far off
  EXPECT_GT(std::abs(sum / 10 - 5.0) / 5.0, 0.5);
}

TEST(Observation, ZeroChannelZeroNoiseGivesZero) {
  auto s = SystemScenario::scalar_prior(5, 3, 0.0, 1.0);
  ChannelMatrix h(Matrix::Zero(3, 5));
  auto obs = sample_observation(s, h, 3);
  EXPECT_TRUE((obs.y.array() == 0.0).all());
  EXPECT_EQ(obs.truth.size(), 5);
}

TEST(Observation, DimensionMismatchIsRejected) {
  auto s = SystemScenario::scalar_prior(5, 3, 0.1, 1.0);
  EXPECT_THROW(sample_observation(s, generate_channel(3, 4, 1), 1), DimensionMismatch);
}

TEST(Observation, DeterministicGivenSeeds) {
  auto s = SystemScenario::scalar_prior(6, 4, 0.1, 1.0);
  auto h = generate_channel(4, 6, 5);
  auto a = sample_observation(s, h, 9);
  auto b = sample_observation(s, h, 9);
  EXPECT_TRUE((a.y.array() == b.y.array()).all());
  EXPECT_TRUE((a.truth.array() == b.truth.array()).all());
}

TEST(Observation, SecondMomentMatchesChannelEnergy) {
  auto s = SystemScenario::scalar_prior(6, 3, 0.01, 1.0);
  auto h = generate_channel(3, 6, 21);
  const int draws = 20000;
  Vector sum2 = Vector::Zero(3);
  for (int d = 0; d < draws; ++d) sum2 += sample_observation(s, h, 1000 + d).y.cwiseAbs2();
  const Vector expected = h.entries().cwiseAbs2().rowwise().sum().array() + 0.01;
  for (int m = 0; m < 3; ++m) {
    const double est = sum2[m] / draws;
    // y_m is Gaussian, so Var[y_m^2] = 2 sigma_m^4
    const double se = std::sqrt(2.0) * expected[m] / std::sqrt(static_cast<double>(draws));
    EXPECT_LT(std::abs(est - expected[m]), 5.0 * se) << "antenna " << m;
  }
}

TEST(Observation, InformativePriorMeansHaveComplementaryVariance) {
  const Vector m = informative_prior_means(20000, 0.1, 4);
  const double var = m.squaredNorm() / m.size();
  EXPECT_NEAR(var, 0.9, 5.0 * 0.9 * std::sqrt(2.0 / m.size()));
  EXPECT_TRUE((informative_prior_means(10, 1.0, 4).array() == 0.0).all());
  EXPECT_TRUE((informative_prior_means(10, 3.0, 4).array() == 0.0).all());
}

TEST(Embedding, RealOnlyInputIsBlockDiagonal) {
  Eigen::MatrixXcd h(2, 3);
  h.real() << 1, 2, 3, 4, 5, 6;
  h.imag().setZero();
  const Matrix e = complex_to_real_embed(h);
  EXPECT_TRUE(e.topRightCorner(2, 3).isZero(0));
  EXPECT_TRUE(e.bottomLeftCorner(2, 3).isZero(0));
  EXPECT_EQ(e.topLeftCorner(2, 3), h.real());
  EXPECT_EQ(e.bottomRightCorner(2, 3), h.real());
}

TEST(Embedding, ScalarComplexProduct) {
  const double a = 1.5, b = -2.0, c = 0.25, d = 3.0;
  Eigen::MatrixXcd h(1, 1);
  h(0, 0) = {a, b};
  Eigen::VectorXcd x(1);
  x[0] = {c, d};
  const Vector prod = complex_to_real_embed(h) * complex_to_real_embed(x);
  EXPECT_DOUBLE_EQ(prod[0], a * c - b * d);
  EXPECT_DOUBLE_EQ(prod[1], a * d + b * c);
}

TEST(Embedding, RoundTripMatchesComplexArithmetic) {
  Rng rng(77);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    const int ns = 2 + trial % 3, nu = 3 + trial % 4;
    Eigen::MatrixXcd h(ns, nu);
    Eigen::VectorXcd x(nu), n(ns);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nu; ++j) h(i, j) = {n01(rng), n01(rng)};
    for (int j = 0; j < nu; ++j) x[j] = {n01(rng), n01(rng)};
    for (int i = 0; i < ns; ++i) n[i] = {n01(rng), n01(rng)};
    const Eigen::VectorXcd y = h * x + n;
    const RealSystem r = complex_to_real_embed(h, y, x, n);
    const Vector diff = r.h * r.x + r.n - r.y;
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
    // product alone, no noise
    const Vector hx = complex_to_real_embed(Eigen::VectorXcd(h * x));
    EXPECT_LT((complex_to_real_embed(h) * complex_to_real_embed(x) - hx).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Embedding, RejectsInconsistentShapes) {
  Eigen::MatrixXcd h(2, 3);
  EXPECT_THROW(complex_to_real_embed(h, Eigen::VectorXcd(3), Eigen::VectorXcd(3), Eigen::VectorXcd(2)),
               DimensionMismatch);
}
