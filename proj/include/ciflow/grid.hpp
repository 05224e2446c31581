#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include "ciflow/types.hpp"

namespace ciflow {

/// Uniform periodic grid on the torus [0, L)^d together with its FFT
/// wavenumber layout. Flat indices are row-major with the last axis fastest.
///
/// Mode index m along an axis is i for i < N/2 and i - N otherwise, so the
/// Nyquist index is -N/2. Physical wavenumbers are m * 2 pi / L.
class SpectralGrid {
 public:
  static constexpr int kMaxPoints = 256;

  SpectralGrid(int dim, int points_per_axis, double period = 2.0 * std::numbers::pi);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double period() const { return period_; }
  double spacing() const { return period_ / n_; }
  double wavenumber_scale() const { return 2.0 * std::numbers::pi / period_; }
  std::size_t size() const { return size_; }

  int mode_of_index(int i) const { return i < n_ / 2 ? i : i - n_; }
  std::array<int, kMaxDim> axis_indices(std::size_t flat) const;
  std::array<int, kMaxDim> modes(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, kMaxDim>& idx) const;
  /// Flat index of the mode -m (wrapped onto the grid).
  std::size_t conjugate_index(std::size_t flat) const;

  /// Physical wavenumber component along `axis` for a flat mode index.
  double wavenumber(std::size_t flat, int axis) const { return tables_->k[flat * kMaxDim + axis]; }
  double k_squared(std::size_t flat) const { return tables_->k2[flat]; }
  /// True when every |m_a| satisfies 3|m_a| < N (2/3-rule retained set).
  bool dealiased(std::size_t flat) const { return tables_->keep[flat] != 0; }
  bool has_nyquist(std::size_t flat) const;

  Vec position(std::size_t flat) const;

  bool operator==(const SpectralGrid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && period_ == other.period_;
  }

 private:
  struct Tables {
    std::vector<double> k;   // size * kMaxDim
    std::vector<double> k2;  // size
    std::vector<unsigned char> keep;
  };

  int dim_;
  int n_;
  double period_;
  std::size_t size_;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace ciflow
