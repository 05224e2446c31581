#include "ciflow/grid.hpp"

#include <cmath>
#include <string>

namespace ciflow {

SpectralGrid::SpectralGrid(int dim, int points_per_axis, double period)
    : dim_(dim), n_(points_per_axis), period_(period) {
  if (dim != 2 && dim != 3) throw PreconditionError("grid dimension must be 2 or 3");
  if (n_ < 4 || n_ > kMaxPoints || (n_ & (n_ - 1)) != 0)
    throw PreconditionError("points per axis must be a power of two in [4, " +
                            std::to_string(kMaxPoints) + "], got " + std::to_string(n_));
  if (!(period > 0.0) || !std::isfinite(period)) throw PreconditionError("period must be positive");

  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);

  auto tables = std::make_shared<Tables>();
  tables->k.assign(size_ * kMaxDim, 0.0);
  tables->k2.assign(size_, 0.0);
  tables->keep.assign(size_, 0);
  const double scale = wavenumber_scale();
  for (std::size_t f = 0; f < size_; ++f) {
    const auto m = modes(f);
    double k2 = 0.0;
    bool keep = true;
    for (int a = 0; a < dim_; ++a) {
      const double k = scale * m[a];
      tables->k[f * kMaxDim + a] = k;
      k2 += k * k;
      keep = keep && 3 * std::abs(m[a]) < n_;
    }
    tables->k2[f] = k2;
    tables->keep[f] = keep ? 1 : 0;
  }
  tables_ = std::move(tables);
}

std::array<int, kMaxDim> SpectralGrid::axis_indices(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::array<int, kMaxDim> SpectralGrid::modes(std::size_t flat) const {
  auto idx = axis_indices(flat);
  for (int a = 0; a < dim_; ++a) idx[a] = mode_of_index(idx[a]);
  return idx;
}

std::size_t SpectralGrid::flat_index(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    const int i = ((idx[a] % n_) + n_) % n_;
    flat = flat * n_ + static_cast<std::size_t>(i);
  }
  return flat;
}

std::size_t SpectralGrid::conjugate_index(std::size_t flat) const {
  auto m = modes(flat);
  for (int a = 0; a < dim_; ++a) m[a] = -m[a];
  return flat_index(m);
}

bool SpectralGrid::has_nyquist(std::size_t flat) const {
  const auto m = modes(flat);
  for (int a = 0; a < dim_; ++a)
    if (m[a] == -n_ / 2) return true;
  return false;
}

Vec SpectralGrid::position(std::size_t flat) const {
  const auto idx = axis_indices(flat);
  Vec x{};
  for (int a = 0; a < dim_; ++a) x[a] = spacing() * idx[a];
  return x;
}

}  // namespace ciflow
