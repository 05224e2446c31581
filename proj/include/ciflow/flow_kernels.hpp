#pragma once

// Per-path integrators for the stochastic flows and the point-parallel
// Monte-Carlo kernels built on them. Inputs are validated by the callers in
// sde_flow / ci_solver; nothing here throws inside a parallel region.

#include <span>
#include <vector>

#include "ciflow/brownian.hpp"
#include "ciflow/drift_history.hpp"
#include "ciflow/parallel.hpp"

namespace ciflow::kernels {

/// Where to store the intermediate states of one path (steps + 1 entries,
/// index k holds the state at time k delta). Either pointer may be null.
struct PathTrace {
  Vec* positions = nullptr;
  Mat* jacobians = nullptr;
};

/// Backward Euler-Maruyama for Y_{s,t}(x) from s = t = steps*delta down to 0:
///   Y_{s-delta} = Y_s - delta b(s, Y_s) - sigma dB[s-delta, s]
///   J_{s-delta} = J_s - delta grad b(s, Y_s) J_s,   Y_t = x, J_t = I.
/// Positions are not wrapped.
void integrate_backward(const DriftHistory& drift, int steps, double delta, double sigma,
                        std::span<const double> increments, const Vec& x, Vec& y, Mat& jac,
                        PathTrace trace = {});

/// Forward Euler-Maruyama for X_{s,t}(x) from s = first_step*delta to
/// (first_step + steps)*delta, with the variational equation for grad X.
void integrate_forward(const DriftHistory& drift, int first_step, int steps, double delta, double sigma,
                       std::span<const double> increments, const Vec& x, Vec& y, Mat& jac);

/// Terminal backward states for every (sample, point), stored [m * P + i].
void backward_endpoints(const DriftHistory& drift, int steps, double sigma, const BrownianEnsemble& noise,
                        std::span<const Vec> points, std::vector<Vec>& y, std::vector<Mat>& jac,
                        Execution policy);

void forward_endpoints(const DriftHistory& drift, int first_step, int steps, double sigma,
                       const BrownianEnsemble& noise, std::span<const Vec> points, std::vector<Vec>& x,
                       std::vector<Mat>& jac, Execution policy);

/// Per-point sample statistics of w = J^T u0(Y) at several leading sample
/// counts. mean/std_error are laid out [prefix][point][component].
struct PullbackMoments {
  std::vector<int> sample_counts;
  std::vector<Vec> mean;
  std::vector<Vec> std_error;
};

PullbackMoments pullback_moments(const DriftHistory& drift, const TrigEvaluator& u0, int steps, double sigma,
                                 const BrownianEnsemble& noise, std::span<const Vec> points,
                                 std::span<const int> sample_counts, Execution policy);

/// Per-point means of the three telescoping terms between a perturbed flow
/// (drift_n, data u0_n) and the reference flow (drift, data u0), driven by
/// common noise:
///   a1 = J_n^T (u0_n(Y_n) - u0(Y_n)), a2 = J_n^T (u0(Y_n) - u0(Y)), a3 = (J_n - J)^T u0(Y),
/// plus the mean squared Frobenius norm of J_n.
struct SplitMoments {
  std::vector<Vec> a1, a2, a3;
  std::vector<double> jac_second_moment;
};

SplitMoments split_moments(const DriftHistory& drift_n, const DriftHistory& drift, const TrigEvaluator& u0_n,
                           const TrigEvaluator& u0, int steps, double sigma, const BrownianEnsemble& noise,
                           std::span<const Vec> points, Execution policy);

/// Per-point, per-drift Monte-Carlo means of sup over the substep grid of
/// |Y^n - Y|^p (minimal image), |J^n - J|^p and |J^n|^p (Frobenius), with
/// the sample standard error of the last. Laid out [n * P + i].
struct PathSupMoments {
  std::vector<double> position_gap, jacobian_gap, jacobian_power, jacobian_power_se;
};

PathSupMoments path_sup_moments(std::span<const DriftHistory* const> drifts, const DriftHistory& limit,
                                int steps, double sigma, double p, const BrownianEnsemble& noise,
                                std::span<const Vec> points, Execution policy);

/// Minimal-image distance on the torus of period L.
double torus_distance(const Vec& a, const Vec& b, int dim, double period);
Vec wrap_to_torus(const Vec& x, int dim, double period);

}  // namespace ciflow::kernels
