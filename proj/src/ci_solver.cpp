#include "ciflow/ci_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ciflow {
namespace {

double aggregate(const std::vector<Vec>& se, int dim) {
  double sum = 0.0;
  for (const auto& e : se)
    for (int j = 0; j < dim; ++j) sum += e[j] * e[j];
  return se.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(se.size()));
}

double rms_norm(const std::vector<Vec>& values, int dim) { return aggregate(values, dim); }

VectorField field_from_points(const SpectralGrid& grid, std::span<const Vec> values) {
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(grid.dim()), std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int j = 0; j < grid.dim(); ++j) samples[j][i] = values[i][j];
  return VectorField::from_physical(grid, samples);
}

void validate_counts(const std::vector<int>& counts, int available) {
  if (counts.empty()) throw PreconditionError("at least one sample count is required");
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 1 || counts[k] > available) throw PreconditionError("sample count exceeds the ensemble size");
    if (k > 0 && counts[k] <= counts[k - 1]) throw PreconditionError("sample counts must be strictly increasing");
  }
}

}  // namespace

std::vector<CiEstimate> ci_velocity_nested(const DriftHistory& drift, const VectorField& u0, double t, double nu,
                                           const BrownianEnsemble& noise, const std::vector<int>& sample_counts,
                                           Execution policy) {
  if (!(u0.grid() == drift.grid())) throw PreconditionError("ci_velocity: initial data and drift on different grids");
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  if (noise.dim() != u0.dim()) throw PreconditionError("ensemble dimension differs from field dimension");
  drift.require_covers(t);
  validate_counts(sample_counts, noise.samples());
  const int steps = noise.steps_for(t);
  const auto& grid = u0.grid();
  const int dim = grid.dim();

  std::vector<CiEstimate> out;
  if (steps == 0) {
    // Y = x and grad Y = I: the representation returns the data itself.
    for (int count : sample_counts)
      out.push_back({u0, u0, std::vector<Vec>(grid.size(), Vec{}), count, 0.0});
    return out;
  }

  const TrigEvaluator u0_eval(u0);
  const auto points = grid_points(grid);
  const auto moments =
      kernels::pullback_moments(drift, u0_eval, steps, noise_scale(nu), noise, points, sample_counts, policy);
  const std::size_t P = points.size();
  for (std::size_t k = 0; k < sample_counts.size(); ++k) {
    const std::span<const Vec> mean(moments.mean.data() + k * P, P);
    std::vector<Vec> se(moments.std_error.begin() + static_cast<std::ptrdiff_t>(k * P),
                        moments.std_error.begin() + static_cast<std::ptrdiff_t>((k + 1) * P));
    VectorField raw = field_from_points(grid, mean);
    VectorField projected = leray_project(raw);
    const double agg = aggregate(se, dim);
    out.push_back({std::move(projected), std::move(raw), std::move(se), sample_counts[k], agg});
  }
  return out;
}

CiEstimate ci_velocity(const DriftHistory& drift, const VectorField& u0, double t, double nu,
                       const BrownianEnsemble& noise, Execution policy) {
  return std::move(ci_velocity_nested(drift, u0, t, nu, noise, {noise.samples()}, policy).front());
}

RepresentationReport make_report(const CiEstimate& estimate, const VectorField& reference, double t, double delta,
                                 SobolevIndex s) {
  RepresentationReport r{t, estimate.velocity, reference, 0.0, 0.0, estimate.std_error, 0.0, estimate.samples, delta};
  const VectorField diff = estimate.velocity - reference;
  const double ref_l2 = l2_norm_of(reference);
  const double ref_hs = sobolev_norm(s, reference);
  r.err_l2_rel = ref_l2 > 0.0 ? l2_norm_of(diff) / ref_l2 : l2_norm_of(diff);
  r.err_hs_rel = ref_hs > 0.0 ? sobolev_norm(s, diff) / ref_hs : sobolev_norm(s, diff);
  r.mc_se_rel = ref_l2 > 0.0 ? estimate.aggregate_std_error / ref_l2 : estimate.aggregate_std_error;
  return r;
}

std::vector<RepresentationReport> representation_check_nested(const MildSolution& solution, const VectorField& u0,
                                                               double t, const BrownianEnsemble& noise,
                                                               const std::vector<int>& sample_counts,
                                                               Execution policy) {
  const std::size_t node = solution.node_of(t);
  const DriftHistory drift = DriftHistory::from_solution(solution);
  const auto estimates = ci_velocity_nested(drift, u0, t, solution.viscosity(), noise, sample_counts, policy);
  std::vector<RepresentationReport> out;
  for (const auto& e : estimates)
    out.push_back(make_report(e, solution.at(node), t, noise.step_size(), solution.sobolev()));
  return out;
}

RepresentationReport representation_check(const MildSolution& solution, const VectorField& u0, double t,
                                          const BrownianEnsemble& noise, Execution policy) {
  return std::move(representation_check_nested(solution, u0, t, noise, {noise.samples()}, policy).front());
}

ErrorDecomposition error_decomposition(const MildSolution& solution_n, const MildSolution& solution,
                                       const VectorField& u0_n, const VectorField& u0, double t,
                                       const BrownianEnsemble& noise, Execution policy) {
  if (!(solution_n.grid() == solution.grid()) || !(u0_n.grid() == u0.grid()) || !(u0.grid() == solution.grid()))
    throw PreconditionError("error_decomposition: mismatched grids");
  if (solution_n.node_count() != solution.node_count() || solution_n.dt() != solution.dt() ||
      solution_n.viscosity() != solution.viscosity())
    throw PreconditionError("error_decomposition: mismatched time grids or viscosities");
  solution.node_of(t);
  if (noise.dim() != u0.dim()) throw PreconditionError("ensemble dimension differs from field dimension");
  const int steps = noise.steps_for(t);
  const DriftHistory drift_n = DriftHistory::from_solution(solution_n);
  const DriftHistory drift = DriftHistory::from_solution(solution);
  const TrigEvaluator eval_n(u0_n), eval(u0);
  const auto points = grid_points(u0.grid());
  const auto raw = kernels::split_moments(drift_n, drift, eval_n, eval, steps, noise_scale(solution.viscosity()),
                                          noise, points, policy);
  const int dim = u0.dim();
  ErrorDecomposition d;
  d.i1 = rms_norm(raw.a1, dim);
  d.i2 = rms_norm(raw.a2, dim);
  d.i3 = rms_norm(raw.a3, dim);
  std::vector<Vec> sum(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int j = 0; j < dim; ++j) sum[i][j] = raw.a1[i][j] + raw.a2[i][j] + raw.a3[i][j];
  d.total = rms_norm(sum, dim);
  for (double m : raw.jac_second_moment) d.jacobian_moment = std::max(d.jacobian_moment, m);
  d.data_gap_l2 = l2_norm_of(u0_n - u0);
  return d;
}

SelfConsistentResult self_consistent_solve(const VectorField& u0, double T, double nu, SobolevIndex s,
                                           const BrownianEnsemble& noise, double outer_tol, int max_outer,
                                           Execution policy) {
  if (!s.admissible(u0.dim())) throw PreconditionError("Sobolev index must exceed d/2");
  if (!(outer_tol >= 0.0)) throw PreconditionError("outer tolerance must be >= 0");
  if (max_outer < 1) throw PreconditionError("max outer iterations must be >= 1");
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  const int nodes = noise.steps_for(T);
  const double delta = noise.step_size();

  SelfConsistentResult result;
  result.delta = delta;
  for (int j = 0; j <= nodes; ++j) result.fields.push_back(heat_semigroup(j * delta, nu, u0));

  for (int k = 0; k < max_outer; ++k) {
    const DriftHistory drift(delta, result.fields);
    std::vector<VectorField> next{u0};
    std::vector<double> se(1, 0.0);
    double change = 0.0, floor = 0.0;
    for (int j = 1; j <= nodes; ++j) {
      const CiEstimate e = ci_velocity(drift, u0, j * delta, nu, noise, policy);
      change = std::max(change, l2_norm_of(e.velocity - result.fields[static_cast<std::size_t>(j)]));
      floor = std::max(floor, 2.0 * e.aggregate_std_error);
      se.push_back(e.aggregate_std_error);
      next.push_back(e.velocity);
    }
    result.fields = std::move(next);
    result.deltas.push_back(change);
    result.noise_floors.push_back(floor);
    result.node_std_error = std::move(se);
    result.iterations = k + 1;
    if (change <= outer_tol + floor) return result;
  }
  std::ostringstream msg;
  msg << "self-consistent solve did not settle in " << max_outer << " outer iterations (last change "
      << result.deltas.back() << ", tolerance " << outer_tol << " + noise floor " << result.noise_floors.back()
      << "); shorten T or increase M";
  throw OuterIterationFailure(msg.str(), result.deltas);
}

}  // namespace ciflow
