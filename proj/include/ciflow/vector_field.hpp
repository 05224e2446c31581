#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ciflow/grid.hpp"

namespace ciflow {

/// A d-component periodic vector field held by its Fourier coefficients.
/// Physical samples are computed on first request and cached; the cache is
/// shared between copies (fields are immutable).
class VectorField {
 public:
  using Components = std::vector<std::vector<Complex>>;

  static VectorField zeros(const SpectralGrid& grid);
  static VectorField from_spectral(const SpectralGrid& grid, Components coefficients);
  static VectorField from_physical(const SpectralGrid& grid, const std::vector<std::vector<double>>& samples);
  static VectorField from_function(const SpectralGrid& grid, const std::function<Vec(const Vec&)>& f);

  const SpectralGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }

  std::span<const Complex> spectral(int component) const { return coeffs_[component]; }
  const Components& spectral() const { return coeffs_; }
  std::span<const double> physical(int component) const;

  /// Largest relative deviation from Hermitian symmetry u(-k) = conj(u(k)).
  double hermitian_defect() const;

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  friend VectorField operator*(double s, const VectorField& a);

 private:
  struct PhysicalCache {
    std::once_flag once;
    std::vector<std::vector<double>> samples;
  };

  VectorField(const SpectralGrid& grid, Components coeffs);

  SpectralGrid grid_;
  Components coeffs_;
  std::shared_ptr<PhysicalCache> cache_;
};

/// Per-mode multiplier applied to every component.
VectorField apply_multiplier(const VectorField& v, const std::function<double(std::size_t)>& multiplier);

/// Fields sharing grid must match exactly.
void require_same_grid(const VectorField& a, const VectorField& b, const char* what);

/// u = A (sin x cos y, -cos x sin y) on the 2D torus (scaled to the period).
VectorField taylor_green(const SpectralGrid& grid, double amplitude = 1.0);

/// Random real field with modes 1 <= |m|_inf <= max_mode and amplitudes
/// decaying like |k|^-decay, optionally Leray-projected, scaled to the
/// requested L2 norm. Deterministic in `seed`.
VectorField random_field(const SpectralGrid& grid, std::uint64_t seed, int max_mode, double decay,
                         bool divergence_free, double l2_norm = 1.0);

}  // namespace ciflow
