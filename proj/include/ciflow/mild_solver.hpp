#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ciflow/operators.hpp"

namespace ciflow {

enum class DuhamelQuadrature {
  /// v = S(dt)u + dt/2 [S(dt)B(u) + B(v)], solved by Picard iteration (2nd order).
  ExponentialTrapezoidal,
  /// v = S(dt)u + dt S(dt)B(u), explicit (1st order).
  ExponentialEuler,
};

struct SolverParams {
  double dt = 1e-3;
  double picard_tol = 1e-10;  // H^s distance between consecutive iterates
  int max_picard = 50;
  DuhamelQuadrature quadrature = DuhamelQuadrature::ExponentialTrapezoidal;
  /// Drop the nonlinear term (Stokes flow); useful as a linear reference.
  bool linear = false;

  void validate() const;
};

struct StepRecord {
  int picard_iterations = 0;
  double residual = 0.0;
  double hs_norm = 0.0;
  double l2_norm = 0.0;
  double divergence = 0.0;
};

/// Time-discrete mild solution u(t_j), t_j = j dt, j = 0..J.
class MildSolution {
 public:
  MildSolution(SobolevIndex s, double nu, double dt, std::vector<VectorField> fields, std::vector<StepRecord> records);

  const SpectralGrid& grid() const { return fields_.front().grid(); }
  SobolevIndex sobolev() const { return s_; }
  double viscosity() const { return nu_; }
  double dt() const { return dt_; }
  std::size_t node_count() const { return fields_.size(); }
  double time(std::size_t j) const { return dt_ * static_cast<double>(j); }
  double final_time() const { return time(fields_.size() - 1); }
  const VectorField& at(std::size_t j) const { return fields_[j]; }
  const std::vector<VectorField>& fields() const { return fields_; }
  /// records()[j] describes the step that produced node j (node 0: initial data).
  const std::vector<StepRecord>& records() const { return records_; }
  /// Node index for time t, or throws if t is not a node.
  std::size_t node_of(double t) const;
  double max_hs_norm() const;

 private:
  SobolevIndex s_;
  double nu_;
  double dt_;
  std::vector<VectorField> fields_;
  std::vector<StepRecord> records_;
};

/// One step of the Duhamel formula from u_j over dt. Throws PicardFailure
/// (carrying the last residual) when the fixed point does not converge.
VectorField duhamel_step(const VectorField& u, double dt, double nu, const SolverParams& params,
                         SobolevIndex s = {}, StepRecord* record = nullptr);

/// March the mild formulation from u0 to T (T must be a multiple of dt).
MildSolution solve_mild(const VectorField& u0, double T, double nu, SobolevIndex s, const SolverParams& params);

inline constexpr double kLocalExistenceSafety = 0.5;

/// T* = (theta / (M_fit ||u0||_{H^s}))^2; +infinity for the zero field.
double local_existence_time(const VectorField& u0, SobolevIndex s, double nu, double m_fit,
                            double safety = kLocalExistenceSafety);

/// sup_j ||u(t_j) - u_n(t_j)||_{H^s} / ||u0 - u0_n||_{H^s}; 0 when the numerator vanishes.
double stability_ratio(const MildSolution& u, const MildSolution& u_n, const VectorField& u0,
                       const VectorField& u0_n, SobolevIndex s);

/// Largest observed ||fg||_{H^s} / (||f||_{H^s} ||g||_{H^s}) over random
/// band-limited pairs (no aliasing on the grid).
double fit_product_constant(const SpectralGrid& grid, SobolevIndex s, int pairs, std::uint64_t seed);

/// Contraction constant for the Duhamel map in H^s: product constant times the
/// smoothing bound sup_k |k| e^{-nu |k|^2 t} <= (2 e nu t)^{-1/2}, integrated in
/// time, times 2 for the difference of two quadratic terms.
double contraction_constant(double product_constant, double nu);

}  // namespace ciflow
