#include <cmath>
#include <numbers>

#include "ciflow/operators.hpp"
#include "ciflow/rng.hpp"
#include "doctest.h"

using namespace ciflow;

TEST_CASE("grid construction rules") {
  CHECK_NOTHROW(SpectralGrid(2, 4));
  CHECK_NOTHROW(SpectralGrid(3, 8));
  CHECK_THROWS_AS(SpectralGrid(2, 2), PreconditionError);
  CHECK_THROWS_AS(SpectralGrid(2, 6), PreconditionError);
  CHECK_THROWS_AS(SpectralGrid(1, 8), PreconditionError);
  CHECK_THROWS_AS(SpectralGrid(4, 8), PreconditionError);
  CHECK_THROWS_AS(SpectralGrid(2, 8, 0.0), PreconditionError);
}

TEST_CASE("wavenumber layout") {
  const SpectralGrid g(2, 8, 4.0 * std::numbers::pi);
  CHECK(g.mode_of_index(0) == 0);
  CHECK(g.mode_of_index(3) == 3);
  CHECK(g.mode_of_index(4) == -4);
  CHECK(g.mode_of_index(7) == -1);
  CHECK(g.wavenumber_scale() == doctest::Approx(0.5));
  const std::size_t flat = g.flat_index({1, 7, 0});
  CHECK(g.modes(flat)[0] == 1);
  CHECK(g.modes(flat)[1] == -1);
  CHECK(g.wavenumber(flat, 1) == doctest::Approx(-0.5));
  CHECK(g.k_squared(flat) == doctest::Approx(0.5));
  const std::size_t conj = g.conjugate_index(flat);
  CHECK(g.modes(conj)[0] == -1);
  CHECK(g.modes(conj)[1] == 1);
  CHECK(g.has_nyquist(g.flat_index({4, 0, 0})));
  CHECK_FALSE(g.has_nyquist(flat));
  CHECK(g.dealiased(g.flat_index({2, 0, 0})));
  CHECK_FALSE(g.dealiased(g.flat_index({3, 0, 0})));
  CHECK(g.position(g.flat_index({2, 1, 0}))[0] == doctest::Approx(g.spacing() * 2));
}

TEST_CASE("divergence of gradient is -|k|^2 on every resolved mode") {
  for (int d : {2, 3}) {
    const SpectralGrid g(d, 8, 3.0);
    rng::Stream s(3, 0);
    std::vector<Complex> q(g.size());
    for (auto& c : q) c = {s.normal(), s.normal()};
    const VectorField grad = gradient_of_scalar(g, q);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.has_nyquist(i)) continue;
      Complex div{};
      for (int a = 0; a < d; ++a) div += Complex(0.0, g.wavenumber(i, a)) * grad.spectral(a)[i];
      worst = std::max(worst, std::abs(div + g.k_squared(i) * q[i]));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("physical samples of a real field") {
  const SpectralGrid g(2, 16);
  const auto v = VectorField::from_function(g, [](const Vec& x) {
    return Vec{std::sin(x[0]) + 0.3 * std::cos(3 * x[1]), std::cos(x[0] + 2 * x[1])};
  });
  CHECK(v.hermitian_defect() <= 1e-12);
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const Vec x = g.position(i);
    CHECK(v.physical(0)[i] == doctest::Approx(std::sin(x[0]) + 0.3 * std::cos(3 * x[1])).epsilon(1e-12));
    CHECK(v.physical(1)[i] == doctest::Approx(std::cos(x[0] + 2 * x[1])).epsilon(1e-12));
  }
  // Mean lives in the k = 0 coefficient.
  const auto c = VectorField::from_function(g, [](const Vec&) { return Vec{2.0, -1.0}; });
  CHECK(c.spectral(0)[0].real() == doctest::Approx(2.0));
  CHECK(c.spectral(1)[0].real() == doctest::Approx(-1.0));
}

TEST_CASE("round trip through physical space") {
  const SpectralGrid g(2, 16);
  const auto v = random_field(g, 5, 6, 0.5, false, 1.0);
  std::vector<std::vector<double>> samples;
  for (int j = 0; j < 2; ++j) samples.emplace_back(v.physical(j).begin(), v.physical(j).end());
  const auto w = VectorField::from_physical(g, samples);
  CHECK(l2_norm_of(w - v) <= 1e-14);
}

TEST_CASE("canned fields") {
  const SpectralGrid g(2, 32);
  const auto tg = taylor_green(g, 2.0);
  CHECK(divergence_norm(tg) <= 1e-13);
  // L2 (rms) of A(sin x cos y, -cos x sin y) is A/sqrt(2).
  CHECK(l2_norm_of(tg) == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-12));
  const auto r1 = random_field(g, 9, 4, 1.0, true, 0.7);
  const auto r2 = random_field(g, 9, 4, 1.0, true, 0.7);
  CHECK(l2_norm_of(r1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(divergence_norm(r1) <= 1e-12 * l2_norm_of(r1));
  CHECK(l2_norm_of(r1 - r2) == 0.0);
  CHECK(r1.hermitian_defect() <= 1e-12);
  CHECK_THROWS_AS(taylor_green(SpectralGrid(3, 8)), PreconditionError);
}

TEST_CASE("field arithmetic") {
  const SpectralGrid g(2, 8);
  const auto a = random_field(g, 1, 3, 0.0, false);
  const auto b = random_field(g, 2, 3, 0.0, false);
  CHECK(l2_norm_of((a + b) - b - a) <= 1e-15);
  CHECK(l2_norm_of(2.0 * a) == doctest::Approx(2.0 * l2_norm_of(a)));
  CHECK_THROWS_AS(a + VectorField::zeros(SpectralGrid(2, 16)), PreconditionError);
}
