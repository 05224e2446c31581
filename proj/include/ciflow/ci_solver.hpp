#pragma once

#include <vector>

#include "ciflow/sde_flow.hpp"

namespace ciflow {

/// Monte-Carlo estimate of P E[(grad Y_{0,t})^T u0(Y_{0,t})] on the grid of u0.
struct CiEstimate {
  VectorField velocity;   // after Leray projection
  VectorField raw;        // sample mean before projection
  std::vector<Vec> std_error;  // per grid point, per component, before projection
  int samples = 0;
  /// sqrt(mean over points of sum_j se_j^2): the L2 size of the sampling error.
  double aggregate_std_error = 0.0;
};

CiEstimate ci_velocity(const DriftHistory& drift, const VectorField& u0, double t, double nu,
                       const BrownianEnsemble& noise, Execution policy = Execution::Parallel);

/// Same estimate at each leading sample count (ascending, last <= M) from a
/// single pass over the ensemble.
std::vector<CiEstimate> ci_velocity_nested(const DriftHistory& drift, const VectorField& u0, double t, double nu,
                                           const BrownianEnsemble& noise, const std::vector<int>& sample_counts,
                                           Execution policy = Execution::Parallel);

struct RepresentationReport {
  double t = 0.0;
  VectorField mc;
  VectorField reference;
  double err_l2_rel = 0.0;
  double err_hs_rel = 0.0;
  std::vector<Vec> std_error;
  double mc_se_rel = 0.0;  // aggregate standard error relative to ||reference||_{L2}
  int samples = 0;
  double delta = 0.0;
};

RepresentationReport make_report(const CiEstimate& estimate, const VectorField& reference, double t, double delta,
                                 SobolevIndex s);

/// Drive the backward flow with the mild solution itself and compare the
/// stochastic representation with the solution at node t.
RepresentationReport representation_check(const MildSolution& solution, const VectorField& u0, double t,
                                          const BrownianEnsemble& noise, Execution policy = Execution::Parallel);

std::vector<RepresentationReport> representation_check_nested(const MildSolution& solution, const VectorField& u0,
                                                               double t, const BrownianEnsemble& noise,
                                                               const std::vector<int>& sample_counts,
                                                               Execution policy = Execution::Parallel);

/// L2 sizes of the three telescoping pieces between the representation
/// driven by (u^n, u0^n) and by (u, u0), before projection.
struct ErrorDecomposition {
  double i1 = 0.0;  // data change u0^n -> u0 along Y^n
  double i2 = 0.0;  // flow change Y^n -> Y inside u0
  double i3 = 0.0;  // Jacobian change grad Y^n -> grad Y
  double total = 0.0;  // || E[..n..] - E[..] ||, bounded by i1 + i2 + i3
  double jacobian_moment = 0.0;  // sup_x E |grad Y^n|_F^2
  double data_gap_l2 = 0.0;      // ||u0^n - u0||_{L2}
  /// sqrt(jacobian_moment) * data_gap_l2: the Cauchy-Schwarz bound on i1.
  double i1_bound() const { return std::sqrt(jacobian_moment) * data_gap_l2; }
};

ErrorDecomposition error_decomposition(const MildSolution& solution_n, const MildSolution& solution,
                                       const VectorField& u0_n, const VectorField& u0, double t,
                                       const BrownianEnsemble& noise, Execution policy = Execution::Parallel);

struct SelfConsistentResult {
  std::vector<VectorField> fields;     // converged drift at t_j = j delta
  std::vector<double> deltas;          // sup_j ||u^(k+1)(t_j) - u^(k)(t_j)||_{L2}, per outer iteration
  std::vector<double> noise_floors;    // 2 x aggregate standard error (sup over nodes), per iteration
  std::vector<double> node_std_error;  // final aggregate standard error per node
  int iterations = 0;
  double delta = 0.0;
  DriftHistory history() const { return DriftHistory(delta, fields); }
};

/// Picard iteration on the drift of the coupled stochastic system on [0, T]
/// (T on the ensemble substep grid), starting from u(t) = S(t) u0. Stops when
/// the sup-over-nodes L2 change is within outer_tol plus twice the aggregate
/// Monte-Carlo standard error; throws OuterIterationFailure otherwise.
SelfConsistentResult self_consistent_solve(const VectorField& u0, double T, double nu, SobolevIndex s,
                                           const BrownianEnsemble& noise, double outer_tol, int max_outer,
                                           Execution policy = Execution::Parallel);

}  // namespace ciflow
