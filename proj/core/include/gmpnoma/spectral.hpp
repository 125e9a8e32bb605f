#pragma once

#include "gmpnoma/model.hpp"

namespace gmpnoma {

struct SpectralRadiusEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration from the normalized all-ones vector. Iterates with B^2 so that
// a dominant +/- rho pair does not stall the estimate.
SpectralRadiusEstimate spectral_radius_empirical(const Matrix& b, double tol = 1e-10, int max_iter = 20000);

struct ExtremeEigenvalues {
  double lambda_min;
  double lambda_max;
};

// Edges of gamma_tilde*H*H^T + (1 - gamma_tilde*N_u) I for i.i.d. unit-variance H.
ExtremeEigenvalues asymptotic_extreme_eigenvalues(int n_users, int n_antennas, double gamma_tilde);

// (1 + 1/sqrt(beta)) / (1 - 1/sqrt(beta)): ratio of the spectral edges of H H^T
double condition_number_asymptotic(double beta);

// sqrt of the eigenvalue ratio of H H^T, i.e. the 2-norm condition number of H
double condition_number_empirical(const ChannelMatrix& channel);

}  // namespace gmpnoma
