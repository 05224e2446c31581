#pragma once

#include <cstdint>

#include "ciflow/vector_field.hpp"

namespace ciflow {

/// Regularity exponent of the potential space H^s.
struct SobolevIndex {
  double s = 2.0;
  /// Product estimates and the Holder embedding need s > d/2.
  bool admissible(int dim) const { return s > 0.5 * dim; }
};

// Linear spectral operators. All are per-mode multipliers and leave the
// mean (k = 0) mode as the formulas dictate.

/// Leray-Hodge projection: v(k) - k (k . v(k)) / |k|^2, k = 0 untouched.
VectorField leray_project(const VectorField& v);

/// Heat semigroup exp(nu t Delta); also the Stokes semigroup on divergence-free fields.
VectorField heat_semigroup(double t, double nu, const VectorField& v);

/// A^alpha S(t) with A = -P Delta acting as |k|^2 on divergence-free fields.
VectorField fractional_stokes_semigroup(double alpha, double t, double nu, const VectorField& v);

/// Convolution with the Gaussian mollifier rho_n: multiplier exp(-|k/n|^2 / 2).
VectorField mollify(int n, const VectorField& v);
double mollifier_multiplier(int n, double k_squared);

/// Zero every mode outside the 2/3-rule retained set.
VectorField dealias(const VectorField& v);

/// B(u) = -P div(u (x) u), products formed on the grid after 2/3 truncation.
VectorField nonlinear_term(const VectorField& u);
/// Advective form -P[(u . grad) u] with the same dealiasing; equals nonlinear_term for div-free u.
VectorField nonlinear_term_advective(const VectorField& u);

/// Component-wise product f_j g_j evaluated on the grid (no dealiasing).
VectorField pointwise_product(const VectorField& f, const VectorField& g);

/// Gradient of the scalar with coefficients q(k).
VectorField gradient_of_scalar(const SpectralGrid& grid, std::span<const Complex> q);

// Norms. With the 1/N^d forward normalization the l2 coefficient sum equals
// the mean square of the physical samples.

double sobolev_norm(SobolevIndex s, const VectorField& v);
double l2_norm_of(const VectorField& v);
/// Real l2 inner product sum_k sum_j Re(conj(u_j(k)) v_j(k)).
double inner_product(const VectorField& u, const VectorField& v);
/// l2 norm of the spectral divergence sum_j i k_j v_j(k).
double divergence_norm(const VectorField& v);

struct HolderOptions {
  std::size_t exhaustive_limit = 1'000'000;
  std::size_t sampled_pairs = 10'000;
  std::uint64_t seed = 0x401de7ULL;
};

/// Discrete Holder seminorm sup |v(x)-v(y)| / |x-y|^alpha over grid pairs at
/// torus distance <= 1. Exhaustive when the pair count is below the limit,
/// otherwise a fixed pseudo-random subsample.
double holder_seminorm(double alpha, const VectorField& v, const HolderOptions& options = {});

}  // namespace ciflow
