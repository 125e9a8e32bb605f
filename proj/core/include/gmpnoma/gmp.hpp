#pragma once

#include "gmpnoma/lmmse.hpp"
#include "gmpnoma/model.hpp"

#include <functional>
#include <vector>

namespace gmpnoma {

// Messages on the bipartite graph. Variances are held as precisions so that the
// +inf initialization is an exact zero. Sum-node messages do not depend on the
// destination user, so every column of x_su / prec_su is identical.
struct MessageState {
  Matrix x_su;        // N_s x N_u
  Matrix prec_su;     // N_s x N_u, 1 / v^s
  RowMatrix x_us;     // N_u x N_s
  RowMatrix prec_us;  // N_u x N_s, 1 / v^u
  int iteration = 0;

  Matrix v_su() const;
  Matrix v_us() const;
};

// Per-iteration sum-node precisions p(t) and total variable-node precisions
// P_k(t) = 1/v_k + sum_m h_mk^2 p_m(t). They depend only on (channel, prior
// variances, noise), so they are computed once and reused across observations.
class VarianceTrack {
 public:
  VarianceTrack(const SystemScenario& scenario, const ChannelMatrix& channel, int max_iter, double rel_tol = 1e-15);

  int length() const { return static_cast<int>(sn_prec_.size()); }
  bool converged() const { return converged_; }
  // entries for iteration t >= 1; beyond the stored range the last entry is used
  const Vector& sn_precision(int t) const;
  const Vector& vn_total_precision(int t) const;

 private:
  std::vector<Vector> sn_prec_;
  std::vector<Vector> vn_total_;
  bool converged_ = false;
};

struct StepOptions {
  FlopCounter* flops = nullptr;
  const VarianceTrack* variances = nullptr;
};

MessageState gmp_init(const SystemScenario& scenario);

// One SN-then-VN sweep. Returns the largest absolute change of x_us.
// Throws DivergenceError if any message becomes non-finite or exceeds 1e9.
double gmp_advance(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                   const Vector& y, const StepOptions& opts = {});

MessageState gmp_step(MessageState state, const SystemScenario& scenario, const ChannelMatrix& channel,
                      const Vector& y, const StepOptions& opts = {});

GaussianBelief gmp_extrinsic(const MessageState& state, const ChannelMatrix& channel);
GaussianBelief gmp_posterior(const MessageState& state, const SystemScenario& scenario,
                             const ChannelMatrix& channel);

struct RunOptions {
  int max_iter = 50;
  double tol = 1e-8;
  bool stop_on_convergence = true;
  StepOptions step;
  // called after every completed sweep
  std::function<void(const MessageState&)> observer;
};

struct DetectorOutput {
  GaussianBelief extrinsic;
  GaussianBelief posterior;
  std::vector<double> max_change;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  MessageState state;
};

DetectorOutput run_gmp(const SystemScenario& scenario, const ChannelMatrix& channel, const Vector& y,
                       const RunOptions& opts = {});

namespace detail {

// shared variance half of a sweep (identical for GMP and SA-GMP)
void update_sn_variances(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                         const StepOptions& opts);
void update_vn_variances(MessageState& state, const SystemScenario& scenario, const ChannelMatrix& channel,
                         const StepOptions& opts);
void check_finite(const MessageState& state, int iteration);

}  // namespace detail

}  // namespace gmpnoma
