#include "gmpnoma/sim/config.hpp"
#include "gmpnoma/sim/experiments.hpp"
#include "gmpnoma/sim/output.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace gmpnoma;
using namespace gmpnoma::sim;

namespace {

int line_of_error(const std::string& text) {
  try {
    Config::parse(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Config, ParsesValuesCommentsAndLists) {
  const auto c = Config::parse("# header\nnu = 400\n\nns=200  # trailing\nprior_vars = 1, 0.1,1e-2\n");
  EXPECT_EQ(c.get_int("nu"), 400);
  EXPECT_EQ(c.get_string("ns"), "200");
  EXPECT_EQ(c.get_double_list("prior_vars"), (std::vector<double>{1.0, 0.1, 0.01}));
  EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_EQ(c.keys().size(), 3u);
}

TEST(Config, ReportsOffendingLine) {
  EXPECT_EQ(line_of_error("nu = 4\nthis line has no equals\n"), 2);
  EXPECT_EQ(line_of_error("a = 1\n\nb =\n"), 3);
  EXPECT_EQ(line_of_error("= 3\n"), 1);
  EXPECT_EQ(line_of_error("a = 1\nb = 2\na = 3\n"), 3);
  EXPECT_EQ(line_of_error("a = 1\n"), -1);
}

TEST(Config, TypedAccessErrorsPointAtTheKeyLine) {
  const auto c = Config::parse("nu = 40\nns = twenty\nlist = 1, x\n", "t.cfg");
  try {
    c.get_int("ns");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("t.cfg:2"), std::string::npos);
  }
  try {
    c.get_double_list("list");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(c.get_int("absent"), ConfigError);
  EXPECT_THROW(c.get_int("nu", 0) + c.get_double("ns", 1.0), ConfigError);
}

TEST(Config, OverridesAndUnknownKeys) {
  auto c = Config::parse("nu = 40\nbogus = 1\n");
  try {
    c.require_known({"nu"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  c.set("nu", "80");
  EXPECT_EQ(c.get_int("nu"), 80);
  EXPECT_EQ(c.error("nu", "x").line(), 0);
}

TEST(Config, LoadMissingFileThrowsFileError) {
  EXPECT_THROW(Config::load("/nonexistent/dir/none.cfg"), FileError);
}

TEST(ExperimentSpec, FromConfig) {
  const auto s = experiment_from_config(Config::parse("detector = gmp\nnu = 60\nns = 10\nprior_vars = 1,0.5\n"));
  EXPECT_EQ(s.detector, DetectorKind::gmp);
  EXPECT_EQ(s.n_users, 60);
  EXPECT_EQ(s.prior_var_schedule.size(), 2u);
  EXPECT_EQ(s.n_trials, 500);

  EXPECT_THROW(experiment_from_config(Config::parse("nu = 10\nns = 10\n")), ConfigError);
  EXPECT_THROW(experiment_from_config(Config::parse("detector = bp\n")), ConfigError);
  EXPECT_THROW(experiment_from_config(Config::parse("trials = 0\n")), ConfigError);
  EXPECT_THROW(experiment_from_config(Config::parse("prior_vars = 1, -1\n")), ConfigError);
  EXPECT_THROW(experiment_from_config(Config::parse("nuu = 3\n")), ConfigError);
}

TEST(SweepSpec, FromConfigRejectsUnderloadedBetas) {
  EXPECT_NO_THROW(sweep_from_config(Config::parse("betas = 1.5, 6\nns = 20\n")));
  EXPECT_THROW(sweep_from_config(Config::parse("betas = 1.0\n")), ConfigError);
  EXPECT_THROW(sweep_from_config(Config::parse("betas = 1.01\nns = 10\n")), ConfigError);
}

TEST(ComplexitySpec, ParsesDetectorList) {
  const auto s = complexity_from_config(Config::parse("detectors = sagmp, lmmse\nnu = 30\nns = 20\n"));
  ASSERT_EQ(s.detectors.size(), 2u);
  EXPECT_EQ(s.detectors[1], DetectorKind::lmmse);
  EXPECT_THROW(complexity_from_config(Config::parse("detectors = sagmp,,lmmse\n")), ConfigError);
}

TEST(Output, NumberFormat) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(1e-4), "1.0000000000e-04");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(schedule_tag(0.01), "1e-02");
}

TEST(Trials, DeterministicAndChannelSharedAcrossSchedule) {
  const auto a = make_trial(30, 20, 0.01, 1.0, 5, 2, 0);
  const auto b = make_trial(30, 20, 0.01, 1.0, 5, 2, 0);
  const auto c = make_trial(30, 20, 0.01, 0.1, 5, 2, 1);
  const auto d = make_trial(30, 20, 0.01, 1.0, 5, 3, 0);
  EXPECT_EQ(a.obs.y, b.obs.y);
  EXPECT_EQ(a.channel.entries(), c.channel.entries());
  EXPECT_NE(a.obs.truth, c.obs.truth);
  EXPECT_NE(a.channel.entries(), d.channel.entries());
}

TEST(MseExperiment, LmmseMatchesAsymptoticMse) {
  ExperimentSpec s;
  s.detector = DetectorKind::lmmse;
  s.n_users = 150;
  s.n_antennas = 100;
  s.n_trials = 200;
  s.prior_var_schedule = {1.0, 0.1};
  for (const auto& t : run_mse_experiment(s)) {
    ASSERT_EQ(t.iterations(), 1);
    EXPECT_NEAR(t.final_mse() / t.mse_lmmse_asymptotic, 1.0, 0.03) << t.prior_var;
    EXPECT_NEAR(t.mse_lmmse_exact / t.mse_lmmse_asymptotic, 1.0, 0.03) << t.prior_var;
  }
}

TEST(MseExperiment, DeterministicAndWritesOneRowPerIteration) {
  ExperimentSpec s;
  s.detector = DetectorKind::sagmp;
  s.n_users = 60;
  s.n_antennas = 40;
  s.n_trials = 4;
  s.max_iter = 25;
  const auto a = run_mse_experiment(s);
  const auto b = run_mse_experiment(s);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].mse, b[0].mse);
  EXPECT_LT(a[0].final_mse(), a[0].mse.front());
  std::ostringstream out;
  write_mse_csv(a[0], out);
  EXPECT_EQ(count_lines(out.str()), 1 + a[0].iterations());
  EXPECT_EQ(out.str().rfind("detector,v_bar_l,iteration,mse,", 0), 0u);
}

TEST(MseExperiment, CountsDivergedGmpTrials) {
  ExperimentSpec s;
  s.detector = DetectorKind::gmp;
  s.n_users = 80;
  s.n_antennas = 40;
  s.n_trials = 3;
  s.max_iter = 200;
  const auto t = run_mse_experiment(s).front();
  EXPECT_TRUE(t.all_diverged());
  EXPECT_EQ(t.diverged_trials.back(), 3);
}

TEST(MsetChart, VariancesDescendTowardFixedPoint) {
  ExperimentSpec s;
  s.n_users = 300;
  s.n_antennas = 100;
  s.n_trials = 3;
  s.max_iter = 40;
  s.prior_var_schedule = {1.0};
  const auto c = run_mset_chart(s).front();
  ASSERT_EQ(c.points.size(), 40u);
  EXPECT_TRUE(std::isinf(c.points.front().v_in));
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_LE(c.points[i].v_out, c.points[i - 1].v_out * (1 + 1e-12));
    EXPECT_EQ(c.points[i].v_in, c.points[i - 1].v_out);
  }
  EXPECT_NEAR(c.points.back().posterior_var / c.v_hat, 1.0, 0.05);
  EXPECT_GT(c.iterations_to_1pct, 1);
  s.detector = DetectorKind::lmmse;
  EXPECT_THROW(run_mset_chart(s), UnsupportedConfiguration);
}

TEST(DecayFit, RecoversGeometricRates) {
  std::vector<double> down, up;
  for (int t = 0; t < 80; ++t) {
    down.push_back(3.0 * std::pow(0.7, t));
    up.push_back(std::pow(1.3, t));
  }
  EXPECT_NEAR(fit_decay_rate(down), 0.7, 1e-9);
  EXPECT_NEAR(fit_decay_rate(up), 1.3, 1e-9);
  EXPECT_TRUE(std::isnan(fit_decay_rate({1.0, 0.5, 0.25})));
}

TEST(Sweep, VerdictsAtBothEnds) {
  SweepSpec s;
  s.betas = {1.5, 8.0};
  s.n_antennas = 40;
  s.seeds = 2;
  s.max_iter = 4000;
  const auto r = run_convergence_sweep(s);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].n_users, 60);
  EXPECT_FALSE(r[0].gmp_converges());
  EXPECT_EQ(r[0].gmp_diverged, 2);
  EXPECT_TRUE(r[1].gmp_converges());
  EXPECT_EQ(r[1].gmp_converged, 2);
  for (const auto& x : r) {
    EXPECT_TRUE(x.sagmp_converges());
    EXPECT_EQ(x.sagmp_converged, 2);
    EXPECT_LT(x.sagmp_lmmse_error, 1e-6);
    EXPECT_FALSE(x.jacobi_converges());
    EXPECT_EQ(x.richardson_converged, 2);
  }
  std::ostringstream out;
  write_convergence_csv(r, out);
  EXPECT_EQ(count_lines(out.str()), 3);
}

TEST(Boundary, AsymptoticCrossingAndBracketCheck) {
  const auto b = locate_gmp_boundary(100, 1e4, 2, 3);
  EXPECT_NEAR(b.beta_asymptotic, 5.8284, 0.01);
  EXPECT_GT(b.beta_empirical, 4.5);
  EXPECT_LT(b.beta_empirical, 6.5);
  EXPECT_THROW(locate_gmp_boundary(100, 1e4, 2, 3, 7.0, 9.0), ParameterRange);
}

TEST(Complexity, OrderingOnSmallSystem) {
  ComplexitySpec s;
  s.n_users = 300;
  s.n_antennas = 210;
  s.prior_vars = {1.0};
  s.targets = {0.5, 0.1};
  s.n_trials = 2;
  s.max_iter = 400;
  const auto rows = run_complexity_curve(s);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_TRUE(complexity_ordered(rows));
  for (const auto& r : rows) {
    if (r.detector == DetectorKind::gmp || r.detector == DetectorKind::jacobi) {
      EXPECT_FALSE(r.reached);
      EXPECT_NE(r.note.find("diverged"), std::string::npos);
    } else {
      EXPECT_TRUE(r.reached);
      EXPECT_LE(r.achieved_mse, r.target_mse);
    }
  }
  std::ostringstream out;
  write_complexity_csv(rows, out);
  EXPECT_EQ(count_lines(out.str()), 11);
}

TEST(Complexity, OrderingRejectsExpensiveSagmp) {
  ComplexityRow sa{DetectorKind::sagmp, 1.0, 0.1, 1.0, 1.0, 10, 5e6, 5e6, true, ""};
  ComplexityRow ri{DetectorKind::richardson, 1.0, 0.1, 1.0, 1.0, 10, 2e6, 2e6, true, ""};
  ComplexityRow lm{DetectorKind::lmmse, 1.0, 0.1, 1.0, 1.0, 0, 9e6, 9e6, true, ""};
  EXPECT_FALSE(complexity_ordered({sa, ri, lm}));
  ri.multiplies = 6e6;
  EXPECT_TRUE(complexity_ordered({sa, ri, lm}));
  EXPECT_FALSE(complexity_ordered({}));
}
