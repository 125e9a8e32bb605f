#pragma once

#include "gmpnoma/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gmpnoma {

enum class SolverKind { jacobi, richardson };

struct IterativeSolverConfig {
  SolverKind kind = SolverKind::richardson;
  double relaxation = 0.0;  // Richardson only; 0 selects 2 / (lambda_min + lambda_max) over range(H^T)
  double tol = 1e-8;
  int max_iter = 1000;
};

void validate(const IterativeSolverConfig& config);

struct SolverTraceEntry {
  int iteration = 0;
  double residual_norm = 0.0;  // ||c - A x(t-1)||, the residual the update consumed
  double step_norm = 0.0;      // ||x(t) - x(t-1)||
  std::uint64_t multiplies = 0;
  std::uint64_t adds = 0;
};

struct SolverResult {
  Vector solution;
  std::vector<SolverTraceEntry> trace;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double relaxation = 0.0;
  std::string relaxation_source;  // "given", "exact" or "asymptotic"
  std::uint64_t setup_multiplies = 0;
  std::uint64_t setup_adds = 0;
};

// Exact-eigenvalue rule is used up to this many users, the asymptotic edges above.
constexpr int kExactRelaxationMaxUsers = 500;

// Solves (I + snr H^T H) x = snr H^T y + xbar from x(0) = xbar. The stopping rule
// estimates the remaining error from the observed contraction of successive steps.
SolverResult solve_normal_equations(const IterativeSolverConfig& config, const SystemScenario& scenario,
                                    const ChannelMatrix& channel, const Vector& y,
                                    const std::function<void(int, const Vector&)>& observer = {});

// rho(D^-1 (A - D)) for the same system matrix
double jacobi_iteration_radius(const SystemScenario& scenario, const ChannelMatrix& channel);

enum class Method { gmp, sagmp, jacobi, richardson, lmmse };

struct FlopCount {
  double multiplies = 0.0;
  double adds = 0.0;
};

// Leading-order operation counts. For LMMSE the cost of one detection is returned
// and n_iter is ignored.
FlopCount flop_count(Method method, int n_users, int n_antennas, int n_iter);

std::string to_string(Method m);

}  // namespace gmpnoma
