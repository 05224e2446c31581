#include <cmath>
#include <cstring>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ciflow/parallel.hpp"
#include "ciflow/sde_flow.hpp"
#include "doctest.h"

using namespace ciflow;

namespace {

// Brownian displacement of sample m over the first `steps` substeps, summed in
// the order the integrator consumes it (last substep first).
Vec displacement(const BrownianEnsemble& e, int m, int steps, int dim) {
  Vec w{};
  for (int k = steps; k >= 1; --k)
    for (int j = 0; j < dim; ++j) w[j] += e.path(m)[static_cast<std::size_t>(k - 1) * dim + j];
  return w;
}

double torus_gap(const Vec& a, const Vec& b, int dim, double L) {
  double r = 0.0;
  for (int j = 0; j < dim; ++j) {
    double d = a[j] - b[j];
    d -= L * std::round(d / L);
    r = std::max(r, std::abs(d));
  }
  return r;
}

// b = (a sin x2, c sin x1): divergence free, b(0) = 0, grad b(0) = [[0, a], [c, 0]].
VectorField shear_pair(const SpectralGrid& g, double a, double c) {
  return VectorField::from_function(g, [=](const Vec& x) { return Vec{a * std::sin(x[1]), c * std::sin(x[0])}; });
}

}  // namespace

TEST_CASE("zero drift: Brownian translation and identity Jacobian") {
  const SpectralGrid g(2, 8);
  const double nu = 0.4, t = 0.05;
  const auto noise = BrownianEnsemble::generate(16, 50, 1e-3, 2, 3);
  const auto pts = grid_points(g);
  const auto flow = simulate_backward_flow(DriftHistory::frozen(VectorField::zeros(g), t), t, nu, pts, noise);
  double pos = 0.0, jac = 0.0;
  for (int m = 0; m < 16; ++m) {
    const Vec w = displacement(noise, m, 50, 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec expected{pts[i][0] - noise_scale(nu) * w[0], pts[i][1] - noise_scale(nu) * w[1], 0.0};
      pos = std::max(pos, torus_gap(flow.position(m, i), expected, 2, g.period()));
      const Mat& J = flow.jacobian(m, i);
      jac = std::max({jac, std::abs(at(J, 0, 0) - 1), std::abs(at(J, 1, 1) - 1), std::abs(at(J, 0, 1)),
                      std::abs(at(J, 1, 0))});
    }
  }
  CHECK(pos <= 1e-13);
  CHECK(jac == 0.0);
  CHECK(noise_scale(0.5) == 1.0);
}

TEST_CASE("constant drift: shifted translation") {
  const SpectralGrid g(2, 8);
  const double nu = 0.2, t = 0.03;
  const auto noise = BrownianEnsemble::generate(8, 30, 1e-3, 2, 4);
  const auto drift = DriftHistory::frozen(VectorField::from_function(g, [](const Vec&) { return Vec{0.7, -1.3}; }), t);
  const std::vector<Vec> pts{{0.1, 0.2, 0.0}, {3.0, 5.5, 0.0}};
  const auto flow = simulate_backward_flow(drift, t, nu, pts, noise);
  double pos = 0.0, jac = 0.0;
  for (int m = 0; m < 8; ++m) {
    const Vec w = displacement(noise, m, 30, 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec expected{pts[i][0] - 0.7 * t - noise_scale(nu) * w[0], pts[i][1] + 1.3 * t - noise_scale(nu) * w[1],
                         0.0};
      pos = std::max(pos, torus_gap(flow.position(m, i), expected, 2, g.period()));
      const Mat& J = flow.jacobian(m, i);
      jac = std::max({jac, std::abs(at(J, 0, 0) - 1), std::abs(at(J, 0, 1))});
    }
  }
  CHECK(pos <= 1e-13);
  CHECK(jac <= 1e-15);
}

TEST_CASE("linear drift Jacobian against the matrix exponential") {
  const SpectralGrid g(2, 8);
  const double a = 1.0, c = -0.5, t = 0.1, delta = 1e-3;
  const auto noise = BrownianEnsemble::generate(4, 100, delta, 2, 5);
  const auto drift = DriftHistory::frozen(shear_pair(g, a, c), t);
  // Vanishing viscosity keeps paths at the stagnation point, where grad b = A.
  const auto flow = simulate_backward_flow(drift, t, 1e-10, {Vec{0.0, 0.0, 0.0}}, noise);
  Eigen::Matrix2d A;
  A << 0.0, a, c, 0.0;
  const Eigen::Matrix2d expected = (-A * t).exp();
  double worst = 0.0;
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) worst = std::max(worst, std::abs(at(flow.jacobian(m, 0), j, k) - expected(j, k)));
  MESSAGE("max entry gap = " << worst);
  CHECK(worst <= 1e-2);
  // First order in delta: (I - delta A)^K = exp(-A t) (I + O(t delta)).
  CHECK(worst <= t * delta * A.squaredNorm());
}

TEST_CASE("variational Jacobian agrees with finite differences") {
  const SpectralGrid g(2, 16);
  const double t = 0.1;
  const auto noise = BrownianEnsemble::generate(32, 100, 1e-3, 2, 6);
  const Vec x{0.7, 1.9, 0.0};
  // Only the rounding of x +- h remains.
  CHECK(jacobian_fd_check(DriftHistory::frozen(VectorField::zeros(g), t), t, 1.0, x, noise) <= 1e-10);
  CHECK(jacobian_fd_check(DriftHistory::frozen(shear_pair(g, 1.0, -0.5), t), t, 1.0, x, noise) <= 1e-3);
  CHECK(jacobian_fd_check(DriftHistory::frozen(taylor_green(g), t), t, 1.0, x, noise) <= 5e-3);

  std::vector<VectorField> nodes;
  for (int j = 0; j <= 10; ++j) nodes.push_back(std::exp(-0.2 * j) * taylor_green(g));
  const DriftHistory history(0.01, nodes);
  CHECK(jacobian_fd_check(history, t, 0.5, x, noise) <= 5e-3);
}

TEST_CASE("forward flow undoes the backward flow as delta shrinks") {
  const SpectralGrid g(2, 16);
  const double t = 0.08, nu = 0.5;
  const auto drift = DriftHistory::frozen(taylor_green(g, 2.0), t);
  const std::vector<Vec> pts{{0.3, 0.4, 0.0}, {2.0, 1.0, 0.0}, {4.5, 5.0, 0.0}};
  std::vector<double> gaps;
  for (double delta : {4e-3, 1e-3, 2.5e-4}) {
    const int steps = static_cast<int>(std::lround(t / delta));
    const auto noise = BrownianEnsemble::generate(64, steps, delta, 2, 7);
    const auto back = simulate_backward_flow(drift, t, nu, pts, noise);
    double gap = 0.0;
    bool positive = true;
    for (int m = 0; m < 64; ++m) {
      std::vector<Vec> start;
      for (std::size_t i = 0; i < pts.size(); ++i) start.push_back(back.position(m, i));
      const auto single = noise.leading(m + 1);
      const auto fwd = simulate_forward_flow(drift, 0.0, t, nu, start, single);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        gap = std::max(gap, torus_gap(fwd.position(m, i), pts[i], 2, g.period()));
        positive = positive && determinant(fwd.jacobian(m, i), 2) > 0.0;
      }
    }
    CHECK(positive);
    gaps.push_back(gap);
  }
  MESSAGE("round-trip gaps " << gaps[0] << " " << gaps[1] << " " << gaps[2]);
  CHECK(gaps[1] <= 0.6 * gaps[0]);
  CHECK(gaps[2] <= 0.6 * gaps[1]);
}

TEST_CASE("stability metrics in the trivial case") {
  const SpectralGrid g(2, 8);
  const double t = 0.02;
  const auto noise = BrownianEnsemble::generate(16, 20, 1e-3, 2, 8);
  const auto zero = DriftHistory::frozen(VectorField::zeros(g), t);
  const std::vector<Vec> pts{{1.0, 2.0, 0.0}, {4.0, 0.5, 0.0}};
  const auto m = flow_stability_metrics({zero, zero}, zero, t, 1.0, pts, noise, 2.0);
  REQUIRE(m.position_gap.size() == 2);
  for (std::size_t n = 0; n < 2; ++n) {
    CHECK(m.position_gap[n] == 0.0);
    CHECK(m.jacobian_gap[n] == 0.0);
    // |I|_F^2 = d.
    CHECK(m.jacobian_moment[n] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m.jacobian_moment_se[n] == 0.0);
  }

  const auto tg = DriftHistory::frozen(taylor_green(g), t);
  const auto half = DriftHistory::frozen(0.5 * taylor_green(g), t);
  const auto seq = flow_stability_metrics({zero, half, tg}, tg, t, 1.0, pts, noise, 2.0);
  CHECK(seq.position_gap[0] > seq.position_gap[1]);
  CHECK(seq.position_gap[2] == 0.0);
  CHECK(seq.jacobian_gap[2] == 0.0);
}

TEST_CASE("serial and parallel paths are bit-identical") {
  const SpectralGrid g(2, 16);
  const double t = 0.05;
  const auto noise = BrownianEnsemble::generate(24, 50, 1e-3, 2, 9);
  const auto drift = DriftHistory::frozen(random_field(g, 3, 4, 1.0, true), t);
  const auto pts = grid_points(SpectralGrid(2, 8));
  set_thread_count(3);
  const auto par = simulate_backward_flow(drift, t, 1.0, pts, noise, Execution::Parallel);
  set_thread_count(1);
  const auto ser = simulate_backward_flow(drift, t, 1.0, pts, noise, Execution::Serial);
  CHECK(std::memcmp(par.positions.data(), ser.positions.data(), par.positions.size() * sizeof(Vec)) == 0);
  CHECK(std::memcmp(par.jacobians.data(), ser.jacobians.data(), par.jacobians.size() * sizeof(Mat)) == 0);
}

TEST_CASE("drift history interpolates linearly between nodes") {
  const SpectralGrid g(2, 8);
  const auto tg = taylor_green(g);
  const DriftHistory h(0.1, {tg, 3.0 * tg});
  const Vec x{0.4, 1.1, 0.0};
  const Vec base = h.value(0.0, x);
  const Vec mid = h.value(0.025, x);
  CHECK(mid[0] == doctest::Approx(1.5 * base[0]).epsilon(1e-13));
  CHECK(h.value(0.1, x)[1] == doctest::Approx(3.0 * base[1]).epsilon(1e-13));
  CHECK_THROWS_AS(h.require_covers(0.2), PreconditionError);
}
