#pragma once

#include <filesystem>
#include <vector>

#include "ciflow/flow_kernels.hpp"

namespace ciflow {

/// Diffusion coefficient sqrt(2 nu): with it, the zero-drift flow averages
/// to the heat semigroup exp(nu t Laplacian).
inline double noise_scale(double nu) { return std::sqrt(2.0 * nu); }

double determinant(const Mat& a, int dim);

/// Endpoints of a flow for every (sample m, point i), stored [m * P + i].
/// Positions are wrapped into the torus; Jacobians are unaffected.
struct FlowEndpoints {
  std::vector<Vec> points;
  int samples = 0;
  int dim = 0;
  std::vector<Vec> positions;
  std::vector<Mat> jacobians;

  const Vec& position(int m, std::size_t i) const { return positions[static_cast<std::size_t>(m) * points.size() + i]; }
  const Mat& jacobian(int m, std::size_t i) const { return jacobians[static_cast<std::size_t>(m) * points.size() + i]; }
  double min_jacobian_determinant() const;
};

using BackwardFlowResult = FlowEndpoints;

/// Y_{0,t}(x_i) and grad Y_{0,t}(x_i) for each sample of the ensemble.
BackwardFlowResult simulate_backward_flow(const DriftHistory& drift, double t, double nu, const std::vector<Vec>& points,
                                          const BrownianEnsemble& noise, Execution policy = Execution::Parallel);

/// X_{s,t}(x_i) and grad X_{s,t}(x_i), s and t on the ensemble substep grid.
FlowEndpoints simulate_forward_flow(const DriftHistory& drift, double s, double t, double nu,
                                    const std::vector<Vec>& points, const BrownianEnsemble& noise,
                                    Execution policy = Execution::Parallel);

/// Sample-averaged max entry-wise gap between the variational Jacobian and
/// central differences of the backward flow started at x +- h e_j (same noise).
double jacobian_fd_check(const DriftHistory& drift, double t, double nu, const Vec& point,
                         const BrownianEnsemble& noise, double h = 1e-4);

/// Common-noise stability of backward flows under a drift sequence b^n -> b.
/// Entry n holds sup over points of the Monte-Carlo mean of
///   sup_r |Y^n - Y|^p,  sup_r |grad Y^n - grad Y|^p,  sup_r |grad Y^n|^p,
/// the sup over r running over the substep grid of [0, t].
struct FlowStabilityMetrics {
  std::vector<double> position_gap;
  std::vector<double> jacobian_gap;
  std::vector<double> jacobian_moment;
  std::vector<double> jacobian_moment_se;  // standard error at the maximizing point
  double jacobian_moment_sup = 0.0;        // sup over n
  double jacobian_moment_sup_se = 0.0;
};

FlowStabilityMetrics flow_stability_metrics(const std::vector<DriftHistory>& sequence, const DriftHistory& limit,
                                            double t, double nu, const std::vector<Vec>& points,
                                            const BrownianEnsemble& noise, double p,
                                            Execution policy = Execution::Parallel);

/// Raw endpoint dump for debugging: int64 M | int64 P | int64 d | positions
/// (M*P*d float64) | Jacobians (M*P*d*d float64), little-endian, [m][i] order.
void write_flow_dump(const std::filesystem::path& path, const FlowEndpoints& flow);

/// Grid nodes of a SpectralGrid as evaluation points.
std::vector<Vec> grid_points(const SpectralGrid& grid);

}  // namespace ciflow
