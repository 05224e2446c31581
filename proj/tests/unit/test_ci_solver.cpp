#include <cmath>
#include <cstring>

#include "ciflow/ci_solver.hpp"
#include "doctest.h"

using namespace ciflow;

namespace {

bool same_bits(const VectorField& a, const VectorField& b) {
  for (int j = 0; j < a.dim(); ++j)
    if (std::memcmp(a.spectral(j).data(), b.spectral(j).data(), a.spectral(j).size_bytes()) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("zero horizon returns the data") {
  const SpectralGrid g(2, 8);
  const auto u0 = random_field(g, 1, 3, 1.0, true);
  const auto noise = BrownianEnsemble::generate(8, 10, 1e-3, 2, 1);
  const auto est = ci_velocity(DriftHistory::frozen(u0, 0.01), u0, 0.0, 1.0, noise);
  CHECK(same_bits(est.velocity, u0));
  CHECK(est.aggregate_std_error == 0.0);
}

TEST_CASE("zero data gives zero velocity") {
  const SpectralGrid g(2, 8);
  const auto noise = BrownianEnsemble::generate(8, 10, 1e-3, 2, 1);
  const auto est = ci_velocity(DriftHistory::frozen(taylor_green(g), 0.01), VectorField::zeros(g), 0.01, 1.0, noise);
  CHECK(l2_norm_of(est.velocity) == 0.0);
  CHECK(est.aggregate_std_error == 0.0);
}

TEST_CASE("Feynman-Kac with zero drift reproduces the heat semigroup") {
  const SpectralGrid g(2, 16);
  const double t = 0.05, nu = 0.5;
  const auto u0 = random_field(g, 2, 4, 1.0, true);
  const auto noise = BrownianEnsemble::generate(2048, 10, 5e-3, 2, 2);
  const auto est = ci_velocity(DriftHistory::frozen(VectorField::zeros(g), t), u0, t, nu, noise);
  const double err = l2_norm_of(est.velocity - heat_semigroup(t, nu, u0));
  MESSAGE("error " << err << ", aggregate se " << est.aggregate_std_error);
  CHECK(err <= 3.0 * est.aggregate_std_error);
  CHECK(est.samples == 2048);
}

TEST_CASE("estimate is divergence free") {
  const SpectralGrid g(2, 16);
  const auto u0 = random_field(g, 3, 4, 1.0, true);
  const auto noise = BrownianEnsemble::generate(64, 20, 1e-3, 2, 3);
  const auto est = ci_velocity(DriftHistory::frozen(taylor_green(g), 0.02), u0, 0.02, 1.0, noise);
  CHECK(divergence_norm(est.velocity) <= 1e-12 * l2_norm_of(est.velocity));
  CHECK(divergence_norm(est.raw) > 1e-6 * l2_norm_of(est.raw));
  CHECK(l2_norm_of(leray_project(est.velocity) - est.velocity) <= 1e-15 * l2_norm_of(est.velocity));
}

TEST_CASE("nested counts equal separate runs on leading samples") {
  const SpectralGrid g(2, 8);
  const auto u0 = random_field(g, 4, 3, 1.0, true);
  const auto drift = DriftHistory::frozen(taylor_green(g), 0.01);
  const auto noise = BrownianEnsemble::generate(256, 10, 1e-3, 2, 4);
  const auto nested = ci_velocity_nested(drift, u0, 0.01, 1.0, noise, {16, 64, 256});
  REQUIRE(nested.size() == 3);
  CHECK(same_bits(nested[0].velocity, ci_velocity(drift, u0, 0.01, 1.0, noise.leading(16)).velocity));
  CHECK(same_bits(nested[1].velocity, ci_velocity(drift, u0, 0.01, 1.0, noise.leading(64)).velocity));
  CHECK(same_bits(nested[2].velocity, ci_velocity(drift, u0, 0.01, 1.0, noise).velocity));
  CHECK_THROWS_AS(ci_velocity_nested(drift, u0, 0.01, 1.0, noise, {64, 16}), PreconditionError);
  CHECK_THROWS_AS(ci_velocity_nested(drift, u0, 0.01, 1.0, noise, {512}), PreconditionError);
  CHECK_THROWS_AS(ci_velocity(drift, u0, 0.02, 1.0, noise), PreconditionError);
}

TEST_CASE("representation of Taylor-Green at small scale") {
  const SpectralGrid g(2, 16);
  const auto u0 = taylor_green(g);
  const auto sol = solve_mild(u0, 0.02, 1.0, {}, {.dt = 1e-3});
  const auto noise = BrownianEnsemble::generate(1024, 20, 1e-3, 2, 5);
  const auto reports = representation_check_nested(sol, u0, 0.02, noise, {256, 1024});
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    MESSAGE("M = " << r.samples << ": err " << r.err_l2_rel << ", se " << r.mc_se_rel);
    CHECK(r.err_l2_rel <= std::max(0.05, 3.0 * r.mc_se_rel));
  }
  CHECK(reports[1].mc_se_rel < reports[0].mc_se_rel);
  const auto single = representation_check(sol, u0, 0.02, noise);
  CHECK(single.err_l2_rel == reports[1].err_l2_rel);
}

TEST_CASE("error decomposition vanishes for identical inputs") {
  const SpectralGrid g(2, 8);
  const auto u0 = random_field(g, 6, 3, 1.0, true, 0.5);
  const auto sol = solve_mild(u0, 0.01, 1.0, {}, {.dt = 1e-3});
  const auto noise = BrownianEnsemble::generate(32, 10, 1e-3, 2, 6);
  const auto d = error_decomposition(sol, sol, u0, u0, 0.01, noise);
  CHECK(d.i1 == 0.0);
  CHECK(d.i2 == 0.0);
  CHECK(d.i3 == 0.0);
  CHECK(d.total == 0.0);
  CHECK(d.data_gap_l2 == 0.0);
  CHECK(d.jacobian_moment >= 2.0 * 0.9);

  const auto u0n = mollify(2, u0);
  const auto soln = solve_mild(u0n, 0.01, 1.0, {}, {.dt = 1e-3});
  const auto e = error_decomposition(soln, sol, u0n, u0, 0.01, noise);
  CHECK(e.total <= e.i1 + e.i2 + e.i3 + 1e-14);
  CHECK(e.i1 <= e.i1_bound());
  CHECK(e.data_gap_l2 == doctest::Approx(l2_norm_of(u0n - u0)).epsilon(1e-14));
}

TEST_CASE("self-consistent solve with zero data converges at once") {
  const SpectralGrid g(2, 8);
  const auto noise = BrownianEnsemble::generate(16, 10, 1e-3, 2, 7);
  const auto r = self_consistent_solve(VectorField::zeros(g), 0.01, 1.0, {}, noise, 1e-6, 5);
  CHECK(r.iterations == 1);
  REQUIRE(r.fields.size() == 11);
  for (const auto& f : r.fields) CHECK(l2_norm_of(f) == 0.0);
}

TEST_CASE("self-consistent solve in the linear regime") {
  const SpectralGrid g(2, 16);
  const double T = 0.02, nu = 1.0;
  const auto u0 = random_field(g, 8, 3, 1.0, true, 0.01);
  const auto noise = BrownianEnsemble::generate(512, 4, 5e-3, 2, 8);
  const auto r = self_consistent_solve(u0, T, nu, {}, noise, 1e-6, 10);
  const auto fk = ci_velocity(DriftHistory::frozen(VectorField::zeros(g), T), u0, T, nu, noise);
  const auto exact = heat_semigroup(T, nu, u0);
  const double err_sc = l2_norm_of(r.fields.back() - exact);
  const double err_fk = l2_norm_of(fk.velocity - exact);
  MESSAGE("self-consistent " << err_sc << ", frozen zero drift " << err_fk << ", iterations " << r.iterations);
  CHECK(err_sc <= 2.0 * std::max(err_fk, fk.aggregate_std_error));
  CHECK(r.iterations <= 10);
  CHECK(r.deltas.size() == static_cast<std::size_t>(r.iterations));
}

TEST_CASE("self-consistent solve reports non-convergence") {
  const SpectralGrid g(2, 8);
  // Enough samples that the noise floor sits below the first change.
  const auto noise = BrownianEnsemble::generate(256, 10, 1e-3, 2, 9);
  CHECK_THROWS_AS(self_consistent_solve(random_field(g, 1, 3, 1.0, true, 5.0), 0.01, 1.0, {}, noise, 0.0, 1),
                  OuterIterationFailure);
}
