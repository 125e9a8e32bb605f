#include "gmpnoma/spectral.hpp"

#include <cmath>
#include <limits>

namespace gmpnoma {

SpectralRadiusEstimate spectral_radius_empirical(const Matrix& b, double tol, int max_iter) {
  if (b.rows() != b.cols()) throw DimensionMismatch("spectral radius needs a square matrix");
  if (b.size() == 0) throw InvalidDimension("spectral radius of an empty matrix");
  if (!b.allFinite()) throw ParameterRange("matrix has non-finite entries");
  if (!(tol > 0.0) || max_iter < 1) throw ParameterRange("tol must be positive and max_iter >= 1");

  const double scale = b.cwiseAbs().maxCoeff();
  const bool symmetric = (b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale;

  SpectralRadiusEstimate out;
  if (scale == 0.0) {
    out.converged = true;
    out.iterations = 1;
    return out;
  }

  Vector v = Vector::Ones(b.rows()) / std::sqrt(static_cast<double>(b.rows()));
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector u = b * v;
    Vector z = b * u;
    const double nz = z.norm();
    out.iterations = it;
    if (nz == 0.0) {
      // B^2 v = 0 for the start vector; fall back on the one-step estimate
      out.value = u.norm() == 0.0 ? 0.0 : out.value;
      out.converged = true;
      return out;
    }
    // for symmetric B, ||Bv|| is the Rayleigh quotient of B^2 and converges quadratically
    const double est = symmetric ? u.norm() : std::sqrt(nz);
    out.value = est;
    if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(est, std::numeric_limits<double>::min())) {
      out.converged = true;
      return out;
    }
    prev = est;
    v = z / nz;
  }
  return out;
}

ExtremeEigenvalues asymptotic_extreme_eigenvalues(int n_users, int n_antennas, double gamma_tilde) {
  if (n_users < 1 || n_antennas < 1) throw InvalidDimension("dimensions must be positive");
  if (n_users <= n_antennas) throw NotOverloaded("eigenvalue predictor requires n_users > n_antennas");
  if (!(gamma_tilde >= 0.0) || !std::isfinite(gamma_tilde))
    throw ParameterRange("gamma_tilde must be finite and non-negative");
  if (gamma_tilde * n_users >= 1.0) throw ParameterRange("gamma_tilde must be below 1/n_users");
  const double c = std::sqrt(static_cast<double>(n_antennas) / n_users);
  const double g = gamma_tilde * n_users;
  return {1.0 + g * ((1.0 - c) * (1.0 - c) - 1.0), 1.0 + g * ((1.0 + c) * (1.0 + c) - 1.0)};
}

double condition_number_asymptotic(double beta) {
  if (!(beta > 1.0)) throw NotOverloaded("condition number predictor requires beta > 1");
  const double c = 1.0 / std::sqrt(beta);
  return (1.0 + c) / (1.0 - c);
}

double condition_number_empirical(const ChannelMatrix& channel) {
  const Matrix& h = channel.entries();
  const Matrix g = h.rows() <= h.cols() ? Matrix(h * h.transpose()) : Matrix(h.transpose() * h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

}  // namespace gmpnoma
