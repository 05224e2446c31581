#include "ciflow/sde_flow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

namespace ciflow {
namespace {

void check_flow_inputs(const DriftHistory& drift, double t, double nu, const BrownianEnsemble& noise) {
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  if (noise.dim() != drift.dim()) throw PreconditionError("ensemble dimension differs from drift dimension");
  drift.require_covers(t);
}

FlowEndpoints package(const std::vector<Vec>& points, const BrownianEnsemble& noise, int dim, double period,
                      std::vector<Vec> positions, std::vector<Mat> jacobians) {
  FlowEndpoints r;
  r.points = points;
  r.samples = noise.samples();
  r.dim = dim;
  for (auto& y : positions) y = kernels::wrap_to_torus(y, dim, period);
  r.positions = std::move(positions);
  r.jacobians = std::move(jacobians);
  return r;
}

}  // namespace

double determinant(const Mat& a, int dim) {
  if (dim == 2) return at(a, 0, 0) * at(a, 1, 1) - at(a, 0, 1) * at(a, 1, 0);
  return at(a, 0, 0) * (at(a, 1, 1) * at(a, 2, 2) - at(a, 1, 2) * at(a, 2, 1)) -
         at(a, 0, 1) * (at(a, 1, 0) * at(a, 2, 2) - at(a, 1, 2) * at(a, 2, 0)) +
         at(a, 0, 2) * (at(a, 1, 0) * at(a, 2, 1) - at(a, 1, 1) * at(a, 2, 0));
}

double FlowEndpoints::min_jacobian_determinant() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& j : jacobians) lo = std::min(lo, determinant(j, dim));
  return lo;
}

std::vector<Vec> grid_points(const SpectralGrid& grid) {
  std::vector<Vec> pts(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) pts[i] = grid.position(i);
  return pts;
}

BackwardFlowResult simulate_backward_flow(const DriftHistory& drift, double t, double nu, const std::vector<Vec>& points,
                                          const BrownianEnsemble& noise, Execution policy) {
  check_flow_inputs(drift, t, nu, noise);
  const int steps = noise.steps_for(t);
  std::vector<Vec> y;
  std::vector<Mat> jac;
  kernels::backward_endpoints(drift, steps, noise_scale(nu), noise, points, y, jac, policy);
  return package(points, noise, drift.dim(), drift.grid().period(), std::move(y), std::move(jac));
}

FlowEndpoints simulate_forward_flow(const DriftHistory& drift, double s, double t, double nu,
                                    const std::vector<Vec>& points, const BrownianEnsemble& noise, Execution policy) {
  check_flow_inputs(drift, t, nu, noise);
  if (!(s >= 0.0 && s <= t)) throw PreconditionError("forward flow needs 0 <= s <= t");
  const int first = noise.steps_for(s);
  const int last = noise.steps_for(t);
  std::vector<Vec> x;
  std::vector<Mat> jac;
  kernels::forward_endpoints(drift, first, last - first, noise_scale(nu), noise, points, x, jac, policy);
  return package(points, noise, drift.dim(), drift.grid().period(), std::move(x), std::move(jac));
}

double jacobian_fd_check(const DriftHistory& drift, double t, double nu, const Vec& point,
                         const BrownianEnsemble& noise, double h) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  check_flow_inputs(drift, t, nu, noise);
  const int dim = drift.dim();
  const int steps = noise.steps_for(t);
  const double sigma = noise_scale(nu);
  double total = 0.0;
  for (int m = 0; m < noise.samples(); ++m) {
    Vec y{};
    Mat jac{};
    kernels::integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(m), point, y, jac);
    double worst = 0.0;
    for (int col = 0; col < dim; ++col) {
      Vec xp = point, xm = point, yp{}, ym{};
      xp[col] += h;
      xm[col] -= h;
      Mat scratch{};
      kernels::integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(m), xp, yp, scratch);
      kernels::integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(m), xm, ym, scratch);
      for (int row = 0; row < dim; ++row) {
        const double fd = (yp[row] - ym[row]) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - at(jac, row, col)));
      }
    }
    total += worst;
  }
  return total / noise.samples();
}

FlowStabilityMetrics flow_stability_metrics(const std::vector<DriftHistory>& sequence, const DriftHistory& limit,
                                            double t, double nu, const std::vector<Vec>& points,
                                            const BrownianEnsemble& noise, double p, Execution policy) {
  if (!(p >= 1.0)) throw PreconditionError("moment order p must be >= 1");
  check_flow_inputs(limit, t, nu, noise);
  std::vector<const DriftHistory*> drifts;
  for (const auto& d : sequence) {
    if (!(d.grid() == limit.grid())) throw PreconditionError("flow_stability_metrics: drifts on different grids");
    d.require_covers(t);
    drifts.push_back(&d);
  }
  const int steps = noise.steps_for(t);
  const auto raw = kernels::path_sup_moments(drifts, limit, steps, noise_scale(nu), p, noise, points, policy);

  FlowStabilityMetrics out;
  const std::size_t P = points.size();
  for (std::size_t n = 0; n < drifts.size(); ++n) {
    double gap = 0.0, jgap = 0.0, jpow = 0.0, jpow_se = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      gap = std::max(gap, raw.position_gap[n * P + i]);
      jgap = std::max(jgap, raw.jacobian_gap[n * P + i]);
      if (raw.jacobian_power[n * P + i] > jpow) {
        jpow = raw.jacobian_power[n * P + i];
        jpow_se = raw.jacobian_power_se[n * P + i];
      }
    }
    out.position_gap.push_back(gap);
    out.jacobian_gap.push_back(jgap);
    out.jacobian_moment.push_back(jpow);
    out.jacobian_moment_se.push_back(jpow_se);
    if (jpow > out.jacobian_moment_sup) {
      out.jacobian_moment_sup = jpow;
      out.jacobian_moment_sup_se = jpow_se;
    }
  }
  return out;
}

void write_flow_dump(const std::filesystem::path& path, const FlowEndpoints& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  auto put = [&](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  static_assert(std::endian::native == std::endian::little, "flow dump assumes a little-endian host");
  put(static_cast<std::int64_t>(flow.samples));
  put(static_cast<std::int64_t>(flow.points.size()));
  put(static_cast<std::int64_t>(flow.dim));
  for (const auto& y : flow.positions)
    for (int k = 0; k < flow.dim; ++k) put(y[k]);
  for (const auto& j : flow.jacobians)
    for (int r = 0; r < flow.dim; ++r)
      for (int c = 0; c < flow.dim; ++c) put(at(j, r, c));
}

}  // namespace ciflow
