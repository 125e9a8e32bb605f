#include "gmpnoma/gmp.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gmpnoma;

namespace {

SystemScenario random_scenario(int nu, int ns, std::uint64_t seed, bool scalar = false) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::normal_distribution<double> n01;
  Vector m(nu), v(nu);
  const double shared = u(rng);
  for (int i = 0; i < nu; ++i) {
    m[i] = 0.5 * n01(rng);
    v[i] = scalar ? shared : u(rng);
  }
  return SystemScenario(nu, ns, 0.05 + 0.5 * u(rng), m, v, seed);
}

double rel_diff(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return (a == b) ? 0.0 : INFINITY;
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

void expect_matches_oracle(const MessageState& s, const oracle::Messages& o, double tol) {
  const Matrix vs = s.v_su();
  const Matrix vu = s.v_us();
  for (Index m = 0; m < o.xs.rows(); ++m)
    for (Index k = 0; k < o.xs.cols(); ++k) {
      EXPECT_LT(rel_diff(s.x_su(m, k), o.xs(m, k)), tol);
      EXPECT_LT(rel_diff(vs(m, k), o.vs(m, k)), tol);
      EXPECT_LT(rel_diff(s.x_us(k, m), o.xu(k, m)), tol);
      EXPECT_LT(rel_diff(vu(k, m), o.vu(k, m)), tol);
    }
}

}  // namespace

TEST(GmpInit, ZeroMeansInfiniteVariances) {
  auto s = random_scenario(5, 3, 1);
  auto st = gmp_init(s);
  EXPECT_EQ(st.iteration, 0);
  EXPECT_TRUE((st.x_us.array() == 0.0).all());
  EXPECT_TRUE((st.prec_us.array() == 0.0).all());
  EXPECT_TRUE(st.v_us().array().isInf().all());
}

TEST(GmpStep, FirstSweepFollowsFromInfiniteVariances) {
  auto s = random_scenario(6, 4, 2);
  auto h = generate_channel(4, 6, 3);
  auto obs = sample_observation(s, h, 4);
  auto st = gmp_step(gmp_init(s), s, h, obs.y);
  EXPECT_EQ(st.iteration, 1);
  for (int k = 0; k < 6; ++k) EXPECT_TRUE((st.x_su.col(k) - obs.y).isZero(0));
  EXPECT_TRUE((st.prec_su.array() == 0.0).all());
  for (int k = 0; k < 6; ++k)
    for (int m = 0; m < 4; ++m) {
      EXPECT_EQ(st.prec_us(k, m), 1.0 / s.prior_vars()[k]);
      EXPECT_DOUBLE_EQ(st.x_us(k, m), s.prior_means()[k]);
    }
}

TEST(GmpStep, MatchesScalarLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int ns = seed % 2 ? 3 : 2, nu = seed % 2 ? 5 : 3;
    auto s = random_scenario(nu, ns, 100 + seed);
    auto h = generate_channel(ns, nu, 200 + seed);
    auto obs = sample_observation(s, h, 300 + seed);
    auto st = gmp_init(s);
    auto o = oracle::gmp_init(ns, nu);
    for (int t = 0; t < 3; ++t) {
      st = gmp_step(st, s, h, obs.y);
      oracle::gmp_sweep(o, h.entries(), obs.y, s.prior_means(), s.prior_vars(), s.noise_var());
      expect_matches_oracle(st, o, 1e-12);
    }
  }
}

TEST(GmpStep, SumNodeMessagesIgnoreDestination) {
  auto s = random_scenario(12, 5, 5);
  auto h = generate_channel(5, 12, 6);
  auto obs = sample_observation(s, h, 7);
  auto st = gmp_init(s);
  for (int t = 0; t < 6; ++t) {
    st = gmp_step(st, s, h, obs.y);
    for (int k = 1; k < 12; ++k) {
      EXPECT_TRUE((st.x_su.col(k).array() == st.x_su.col(0).array()).all());
      EXPECT_TRUE((st.prec_su.col(k).array() == st.prec_su.col(0).array()).all());
    }
    EXPECT_TRUE((st.v_su().array() >= s.noise_var()).all());
    EXPECT_TRUE((st.prec_us.array() >= 0.0).all());
  }
}

TEST(GmpStep, VariancesDecreaseMonotonically) {
  // N_u = 250, N_s = 200, snr = 100, v = 1
  auto s = SystemScenario::scalar_prior(250, 200, 0.01, 1.0);
  auto h = generate_channel(200, 250, 8);
  auto obs = sample_observation(s, h, 9);
  auto st = gmp_step(gmp_init(s), s, h, obs.y);
  double prev_mean = st.v_us().mean();
  RowMatrix prev = st.v_us();
  for (int t = 2; t <= 10; ++t) {
    st = gmp_step(st, s, h, obs.y);
    const RowMatrix cur = st.v_us();
    EXPECT_LT(cur.mean(), prev_mean) << "iteration " << t;
    EXPECT_TRUE((cur.array() <= prev.array() * (1.0 + 1e-14)).all()) << "iteration " << t;
    prev_mean = cur.mean();
    prev = cur;
  }
}

TEST(GmpStep, DimensionMismatchRejected) {
  auto s = random_scenario(5, 3, 10);
  auto h = generate_channel(3, 5, 11);
  EXPECT_THROW(gmp_step(gmp_init(s), s, h, Vector::Zero(4)), DimensionMismatch);
  auto other = random_scenario(6, 3, 12);
  EXPECT_THROW(gmp_step(gmp_init(other), s, h, Vector::Zero(3)), DimensionMismatch);
}

TEST(GmpStep, DivergenceCarriesIteration) {
  // beta = 2 at high snr: the mean recursion has radius ~1.9
  auto s = SystemScenario::scalar_prior(200, 100, 0.001, 1.0);
  auto h = generate_channel(100, 200, 13);
  auto obs = sample_observation(s, h, 14);
  auto st = gmp_init(s);
  int failed_at = -1;
  try {
    for (int t = 0; t < 400; ++t) gmp_advance(st, s, h, obs.y);
  } catch (const DivergenceError& e) {
    failed_at = e.iteration();
  }
  EXPECT_GT(failed_at, 5);
  RunOptions opts;
  opts.max_iter = 400;
  auto out = run_gmp(s, h, obs.y, opts);
  EXPECT_TRUE(out.diverged);
  EXPECT_EQ(out.iterations, failed_at - 1);
  EXPECT_TRUE(out.posterior.means.allFinite());
}

TEST(GmpOutput, ZeroColumnGivesInfiniteExtrinsicVariance) {
  auto s = random_scenario(5, 3, 15);
  Matrix hm = generate_channel(3, 5, 16).entries();
  hm.col(2).setZero();
  ChannelMatrix h(hm);
  auto obs = sample_observation(s, h, 17);
  auto st = gmp_init(s);
  for (int t = 0; t < 4; ++t) st = gmp_step(st, s, h, obs.y);
  auto e = gmp_extrinsic(st, h);
  EXPECT_EQ(e.precisions[2], 0.0);
  EXPECT_TRUE(std::isinf(e.variances()[2]));
  EXPECT_GT(e.precisions[0], 0.0);
  auto p = gmp_posterior(st, s, h);
  EXPECT_DOUBLE_EQ(p.means[2], s.prior_means()[2]);
  EXPECT_DOUBLE_EQ(p.variances()[2], s.prior_vars()[2]);
}

TEST(GmpOutput, FirstIterationPosteriorIsPrior) {
  auto s = random_scenario(5, 3, 18);
  auto h = generate_channel(3, 5, 19);
  auto st = gmp_step(gmp_init(s), s, h, sample_observation(s, h, 20).y);
  auto p = gmp_posterior(st, s, h);
  EXPECT_TRUE((p.means - s.prior_means()).isZero(1e-15));
  EXPECT_TRUE((p.variances() - s.prior_vars()).isZero(1e-15));
}

TEST(GmpOutput, ExtrinsicCombinedWithPriorIsPosterior) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = random_scenario(9, 4, 30 + seed);
    auto h = generate_channel(4, 9, 40 + seed);
    auto obs = sample_observation(s, h, 50 + seed);
    auto st = gmp_init(s);
    for (int t = 0; t < 5; ++t) st = gmp_step(st, s, h, obs.y);
    auto e = gmp_extrinsic(st, h);
    EXPECT_TRUE((e.precisions.array() > 0.0).all());
    auto combined = combine_with_prior(e, s.prior_means(), s.prior_vars());
    auto p = gmp_posterior(st, s, h);
    EXPECT_LT((combined.means - p.means).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT(((combined.precisions - p.precisions).array() / p.precisions.array()).abs().maxCoeff(), 1e-15);
  }
}

TEST(GmpOutput, MatchesOraclePosterior) {
  auto s = random_scenario(5, 3, 60);
  auto h = generate_channel(3, 5, 61);
  auto obs = sample_observation(s, h, 62);
  auto st = gmp_init(s);
  auto o = oracle::gmp_init(3, 5);
  for (int t = 0; t < 4; ++t) {
    st = gmp_step(st, s, h, obs.y);
    oracle::gmp_sweep(o, h.entries(), obs.y, s.prior_means(), s.prior_vars(), s.noise_var());
  }
  Vector om, ov;
  oracle::posterior(o, h.entries(), s.prior_means(), s.prior_vars(), om, ov);
  auto p = gmp_posterior(st, s, h);
  EXPECT_LT((p.means - om).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.variances() - ov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GmpOutput, RequiresAtLeastOneIteration) {
  auto s = random_scenario(5, 3, 63);
  auto h = generate_channel(3, 5, 64);
  EXPECT_THROW(gmp_extrinsic(gmp_init(s), h), ParameterRange);
  EXPECT_THROW(gmp_posterior(gmp_init(s), s, h), ParameterRange);
}

TEST(VarianceTrackCache, ReproducesInlineVariances) {
  auto s = random_scenario(40, 16, 70);
  auto h = generate_channel(16, 40, 71);
  VarianceTrack track(s, h, 200);
  EXPECT_TRUE(track.converged());
  StepOptions cached;
  cached.variances = &track;
  for (std::uint64_t draw = 0; draw < 3; ++draw) {
    auto obs = sample_observation(s, h, 72 + draw);
    auto a = gmp_init(s), b = gmp_init(s);
    for (int t = 0; t < track.length() + 5; ++t) {
      gmp_advance(a, s, h, obs.y);
      gmp_advance(b, s, h, obs.y, cached);
      ASSERT_LT((a.prec_us - b.prec_us).cwiseAbs().maxCoeff(), 1e-12 * a.prec_us.cwiseAbs().maxCoeff());
      ASSERT_LT((a.x_us - b.x_us).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, a.x_us.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(GmpFlops, MeanPathIsFourMultipliesAndFourAddsPerEdge) {
  auto s = SystemScenario::scalar_prior(40, 16, 0.1, 1.0);
  auto h = generate_channel(16, 40, 80);
  auto obs = sample_observation(s, h, 81);
  auto st = gmp_init(s);
  FlopCounter f;
  StepOptions opts;
  opts.flops = &f;
  gmp_advance(st, s, h, obs.y, opts);
  const std::uint64_t e = 40 * 16;
  EXPECT_EQ(f.mean_mul, 4 * e + 40);
  EXPECT_EQ(f.mean_add, 4 * e);
  EXPECT_GT(f.var_mul, 0u);
}
