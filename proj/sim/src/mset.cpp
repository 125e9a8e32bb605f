#include "gmpnoma/sim/experiments.hpp"
#include "gmpnoma/sim/output.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace gmpnoma::sim {

std::vector<MsetChart> run_mset_chart(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.detector != DetectorKind::gmp && spec.detector != DetectorKind::sagmp)
    throw UnsupportedConfiguration("MSET charts are defined for gmp and sagmp only");
  std::vector<MsetChart> charts;
  for (std::size_t j = 0; j < spec.prior_var_schedule.size(); ++j) {
    const double v = spec.prior_var_schedule[j];
    const auto n = static_cast<std::size_t>(spec.max_iter);
    std::vector<double> v_out(n, 0.0), post(n, 0.0);
    for (int t = 0; t < spec.n_trials; ++t) {
      const TrialProblem p =
          make_trial(spec.n_users, spec.n_antennas, spec.noise_var, v, spec.base_seed, t, static_cast<int>(j));
      const Matrix h2 = p.channel.entries().cwiseAbs2();
      // SA-GMP runs the same variance recursion as GMP
      MessageState st = gmp_init(p.scenario);
      for (std::size_t it = 0; it < n; ++it) {
        detail::update_sn_variances(st, p.scenario, p.channel, {});
        detail::update_vn_variances(st, p.scenario, p.channel, {});
        st.iteration += 1;
        v_out[it] += st.prec_us.cwiseInverse().mean();
        const Vector total = h2.transpose() * st.prec_su.col(0) + p.scenario.prior_vars().cwiseInverse();
        post[it] += total.cwiseInverse().mean();
      }
    }
    MsetChart c;
    c.prior_var = v;
    c.v_hat = gmp_variance_fixed_point(spec.n_users, spec.n_antennas, v, spec.noise_var).v_hat;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < n; ++it) {
      MsetPoint pt;
      pt.iteration = static_cast<int>(it) + 1;
      pt.v_in = prev;
      pt.v_out = v_out[it] / spec.n_trials;
      pt.posterior_var = post[it] / spec.n_trials;
      prev = pt.v_out;
      c.points.push_back(pt);
    }
    const double final_v = c.points.back().v_out;
    for (const auto& pt : c.points)
      if (std::abs(pt.v_out - final_v) <= 0.01 * final_v) {
        c.iterations_to_1pct = pt.iteration;
        break;
      }
    charts.push_back(std::move(c));
  }
  return charts;
}

void write_mset_csv(const MsetChart& c, DetectorKind detector, std::ostream& out) {
  out << "detector,v_bar_l,iteration,v_in,v_out,mean_posterior_var,v_hat\n";
  for (const auto& p : c.points)
    out << to_string(detector) << ',' << format_number(c.prior_var) << ',' << p.iteration << ','
        << format_number(p.v_in) << ',' << format_number(p.v_out) << ',' << format_number(p.posterior_var) << ','
        << format_number(c.v_hat) << '\n';
}

}  // namespace gmpnoma::sim
