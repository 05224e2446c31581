#pragma once

#include <vector>

#include "ciflow/mild_solver.hpp"
#include "ciflow/trig_eval.hpp"

namespace ciflow {

/// Divergence-free drift b(r, x) on [t0, t0 + (J) dt], piecewise linear in
/// time between nodes and evaluated exactly in space. When a query time sits
/// on a node only that node's field is evaluated.
class DriftHistory {
 public:
  /// Uniformly spaced nodes starting at t = 0.
  DriftHistory(double dt, std::vector<VectorField> fields,
               double prune_relative = TrigEvaluator::kDefaultPrune);

  /// Time-independent drift valid on [0, horizon].
  static DriftHistory frozen(const VectorField& field, double horizon);
  static DriftHistory from_solution(const MildSolution& solution);

  const SpectralGrid& grid() const { return fields_.front().grid(); }
  int dim() const { return grid().dim(); }
  double end_time() const { return end_time_; }
  double dt() const { return dt_; }
  bool is_frozen() const { return frozen_; }
  const std::vector<VectorField>& fields() const { return fields_; }
  bool is_zero() const;

  void evaluate(double s, const Vec& x, Vec& value, Mat& gradient) const;
  Vec value(double s, const Vec& x) const;

  /// Throws PreconditionError when [0, t] is not covered.
  void require_covers(double t) const;

 private:
  DriftHistory() = default;
  /// Node index and linear weight of node+1 for time s.
  std::pair<std::size_t, double> locate(double s) const;

  double dt_ = 0.0;
  double end_time_ = 0.0;
  bool frozen_ = false;
  std::vector<VectorField> fields_;
  std::vector<TrigEvaluator> evaluators_;
};

}  // namespace ciflow
