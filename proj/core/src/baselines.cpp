#include "gmpnoma/baselines.hpp"

#include "gmpnoma/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gmpnoma {

namespace {

struct NormalEquations {
  Matrix a;
  Vector c;
  std::uint64_t mul = 0;
  std::uint64_t add = 0;
};

NormalEquations assemble(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y) {
  check_dimensions(scenario, channel, y);
  if (!(scenario.noise_var() > 0.0)) throw ParameterRange("normal equations require noise_var > 0");
  const double snr = scenario.scalar_prior_var() / scenario.noise_var();
  const Matrix& h = channel.entries();
  const std::uint64_t nu = static_cast<std::uint64_t>(h.cols()), ns = static_cast<std::uint64_t>(h.rows());
  NormalEquations ne;
  ne.a.noalias() = h.transpose() * h;
  ne.a *= snr;
  ne.a.diagonal().array() += 1.0;
  ne.c = snr * (h.transpose() * y) + scenario.prior_means();
  ne.mul = ns * nu * nu + nu * nu + ns * nu + nu;
  ne.add = (ns - 1) * nu * nu + nu + (ns - 1) * nu + nu;
  return ne;
}

}  // namespace

void validate(const IterativeSolverConfig& config) {
  if (!(config.tol > 0.0)) throw ParameterRange("solver tol must be positive");
  if (config.max_iter < 1) throw ParameterRange("solver max_iter must be >= 1");
  if (!(config.relaxation >= 0.0) || !std::isfinite(config.relaxation))
    throw ParameterRange("relaxation must be finite and non-negative");
}

SolverResult solve_normal_equations(const IterativeSolverConfig& config, const SystemScenario& scenario,
                                    const ChannelMatrix& channel, const Vector& y,
                                    const std::function<void(int, const Vector&)>& observer) {
  validate(config);
  NormalEquations ne = assemble(scenario, channel, y);
  const Index n = ne.a.rows();
  const std::uint64_t nu = static_cast<std::uint64_t>(n);

  SolverResult r;
  r.setup_multiplies = ne.mul;
  r.setup_adds = ne.add;

  Vector scale;  // D^-1 for Jacobi, w for Richardson
  if (config.kind == SolverKind::jacobi) {
    scale = ne.a.diagonal().cwiseInverse();
  } else {
    double w = config.relaxation;
    if (w > 0.0) {
      r.relaxation_source = "given";
    } else if (n <= kExactRelaxationMaxUsers) {
      // The error x* - xbar lies in range(H^T), so the N_u - N_s unit eigenvalues
      // from the null space of H never need to be damped.
      Eigen::SelfAdjointEigenSolver<Matrix> es(ne.a, Eigen::EigenvaluesOnly);
      const Index skip = std::max<Index>(0, n - scenario.n_antennas());
      w = 2.0 / (es.eigenvalues()[skip] + es.eigenvalues()[n - 1]);
      r.relaxation_source = "exact";
    } else {
      const double snr = scenario.scalar_prior_var() / scenario.noise_var();
      const double su = std::sqrt(static_cast<double>(scenario.n_users()));
      const double sa = std::sqrt(static_cast<double>(scenario.n_antennas()));
      // The largest eigenvalue of a finite H^T H fluctuates above the bulk edge on a
      // Tracy-Widom scale; 4 of those widths keeps w * lambda_max below 2.
      const double tw_width = std::cbrt(1.0 / su + 1.0 / sa) / (su + sa);
      const double upper = (su + sa) * (su + sa) * (1.0 + 4.0 * tw_width);
      const double lower = (su - sa) * (su - sa);
      w = 2.0 / (2.0 + snr * (lower + upper));
      r.relaxation_source = "asymptotic";
    }
    r.relaxation = w;
    scale = Vector::Constant(n, w);
  }

  Vector x = scenario.prior_means();
  const double c_norm = std::max(ne.c.norm(), 1.0);
  std::deque<double> ratios;
  double prev_step = 0.0;
  for (int t = 1; t <= config.max_iter; ++t) {
    const Vector res = ne.c - ne.a * x;
    const Vector dx = scale.cwiseProduct(res);
    x += dx;
    SolverTraceEntry e;
    e.iteration = t;
    e.residual_norm = res.norm();
    e.step_norm = dx.norm();
    e.multiplies = nu * nu + nu;
    e.adds = nu * nu + nu;
    r.trace.push_back(e);
    r.iterations = t;
    if (!x.allFinite() || !std::isfinite(e.residual_norm) || e.residual_norm / c_norm > kDivergenceThreshold) {
      r.diverged = true;
      break;
    }
    if (observer) observer(t, x);
    if (e.step_norm == 0.0) {
      r.converged = true;
      break;
    }
    if (prev_step > 0.0) {
      ratios.push_back(e.step_norm / prev_step);
      if (ratios.size() > 5) ratios.pop_front();
    }
    prev_step = e.step_norm;
    if (ratios.size() >= 2) {
      const double q = *std::max_element(ratios.begin(), ratios.end());
      if (q < 1.0 && q / (1.0 - q) * e.step_norm <= config.tol * std::max(x.norm(), 1e-300)) {
        r.converged = true;
        break;
      }
    }
  }
  r.solution = std::move(x);
  return r;
}

double jacobi_iteration_radius(const SystemScenario& scenario, const ChannelMatrix& channel) {
  NormalEquations ne = assemble(scenario, channel, Vector::Zero(scenario.n_antennas()));
  const Vector d = ne.a.diagonal();
  Matrix b = ne.a;
  b.diagonal().setZero();
  // D^-1/2 (A - D) D^-1/2 is similar to D^-1 (A - D) and symmetric
  const Vector s = d.cwiseSqrt().cwiseInverse();
  b = s.asDiagonal() * b * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

FlopCount flop_count(Method method, int n_users, int n_antennas, int n_iter) {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("dimensions must be positive");
  if (n_iter < 0) throw ParameterRange("n_iter must be non-negative");
  const double nu = n_users, ns = n_antennas, it = n_iter;
  FlopCount f;
  switch (method) {
    case Method::gmp:
    case Method::sagmp:
      f.multiplies = 4.0 * nu * ns * it;
      f.adds = 4.0 * nu * ns * it;
      break;
    case Method::jacobi:
    case Method::richardson:
      f.multiplies = ns * nu * nu + nu * nu * it;
      f.adds = ns * nu * nu + nu * nu * it;
      break;
    case Method::lmmse: {
      const double cost = std::min(ns * nu * nu + nu * nu * nu, nu * ns * ns + ns * ns * ns);
      f.multiplies = cost;
      f.adds = cost;
      break;
    }
  }
  return f;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::gmp: return "gmp";
    case Method::sagmp: return "sagmp";
    case Method::jacobi: return "jacobi";
    case Method::richardson: return "richardson";
    case Method::lmmse: return "lmmse";
  }
  return "unknown";
}

}  // namespace gmpnoma
