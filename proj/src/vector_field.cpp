#include "ciflow/vector_field.hpp"

#include <cmath>

#include "ciflow/operators.hpp"
#include "ciflow/rng.hpp"
#include "fft.hpp"

namespace ciflow {

VectorField::VectorField(const SpectralGrid& grid, Components coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)), cache_(std::make_shared<PhysicalCache>()) {}

VectorField VectorField::zeros(const SpectralGrid& grid) {
  return VectorField(grid, Components(static_cast<std::size_t>(grid.dim()), std::vector<Complex>(grid.size())));
}

VectorField VectorField::from_spectral(const SpectralGrid& grid, Components coefficients) {
  if (coefficients.size() != static_cast<std::size_t>(grid.dim()))
    throw PreconditionError("component count must equal grid dimension");
  for (const auto& c : coefficients)
    if (c.size() != grid.size()) throw PreconditionError("coefficient array size does not match grid");
  return VectorField(grid, std::move(coefficients));
}

VectorField VectorField::from_physical(const SpectralGrid& grid, const std::vector<std::vector<double>>& samples) {
  if (samples.size() != static_cast<std::size_t>(grid.dim()))
    throw PreconditionError("component count must equal grid dimension");
  Components coeffs(samples.size(), std::vector<Complex>(grid.size()));
  std::vector<Complex> buf(grid.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].size() != grid.size()) throw PreconditionError("sample array size does not match grid");
    for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = samples[j][i];
    fft::forward(grid, buf, coeffs[j]);
  }
  VectorField v(grid, std::move(coeffs));
  std::call_once(v.cache_->once, [&] { v.cache_->samples = samples; });
  return v;
}

VectorField VectorField::from_function(const SpectralGrid& grid, const std::function<Vec(const Vec&)>& f) {
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(grid.dim()), std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec u = f(grid.position(i));
    for (int j = 0; j < grid.dim(); ++j) samples[j][i] = u[j];
  }
  return from_physical(grid, samples);
}

std::span<const double> VectorField::physical(int component) const {
  std::call_once(cache_->once, [this] {
    std::vector<std::vector<double>> samples(coeffs_.size(), std::vector<double>(grid_.size()));
    std::vector<Complex> buf(grid_.size());
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      fft::inverse(grid_, coeffs_[j], buf);
      for (std::size_t i = 0; i < grid_.size(); ++i) samples[j][i] = buf[i].real();
    }
    cache_->samples = std::move(samples);
  });
  return cache_->samples[component];
}

double VectorField::hermitian_defect() const {
  double defect = 0.0, scale = 0.0;
  for (const auto& c : coeffs_) {
    for (std::size_t f = 0; f < grid_.size(); ++f) {
      defect = std::max(defect, std::abs(c[grid_.conjugate_index(f)] - std::conj(c[f])));
      scale = std::max(scale, std::abs(c[f]));
    }
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

namespace {
template <class Op>
VectorField combine(const VectorField& a, const VectorField& b, Op op) {
  require_same_grid(a, b, "field arithmetic");
  VectorField::Components out = a.spectral();
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto rhs = b.spectral(static_cast<int>(j));
    for (std::size_t i = 0; i < out[j].size(); ++i) out[j][i] = op(out[j][i], rhs[i]);
  }
  return VectorField::from_spectral(a.grid(), std::move(out));
}
}  // namespace

VectorField operator+(const VectorField& a, const VectorField& b) {
  return combine(a, b, [](Complex x, Complex y) { return x + y; });
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  return combine(a, b, [](Complex x, Complex y) { return x - y; });
}

VectorField operator*(double s, const VectorField& a) {
  VectorField::Components out = a.spectral();
  for (auto& comp : out)
    for (auto& c : comp) c *= s;
  return VectorField::from_spectral(a.grid(), std::move(out));
}

VectorField apply_multiplier(const VectorField& v, const std::function<double(std::size_t)>& multiplier) {
  const auto& grid = v.grid();
  std::vector<double> m(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) m[f] = multiplier(f);
  VectorField::Components out = v.spectral();
  for (auto& comp : out)
    for (std::size_t f = 0; f < grid.size(); ++f) comp[f] *= m[f];
  return VectorField::from_spectral(grid, std::move(out));
}

void require_same_grid(const VectorField& a, const VectorField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw PreconditionError(std::string(what) + ": fields live on different grids");
}

VectorField taylor_green(const SpectralGrid& grid, double amplitude) {
  if (grid.dim() != 2) throw PreconditionError("Taylor-Green field is two-dimensional");
  const double kappa = grid.wavenumber_scale();
  return VectorField::from_function(grid, [&](const Vec& x) {
    return Vec{amplitude * std::sin(kappa * x[0]) * std::cos(kappa * x[1]),
               -amplitude * std::cos(kappa * x[0]) * std::sin(kappa * x[1]), 0.0};
  });
}

VectorField random_field(const SpectralGrid& grid, std::uint64_t seed, int max_mode, double decay,
                         bool divergence_free, double l2_norm) {
  if (max_mode < 1 || 2 * max_mode >= grid.n()) throw PreconditionError("random_field: max_mode out of range");
  rng::Stream stream(seed, 0x5eedf1e1dULL);
  VectorField::Components coeffs(static_cast<std::size_t>(grid.dim()), std::vector<Complex>(grid.size()));
  // Draw each conjugate pair once so the field is exactly real.
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto m = grid.modes(f);
    int inf_norm = 0;
    for (int a = 0; a < grid.dim(); ++a) inf_norm = std::max(inf_norm, std::abs(m[a]));
    const std::size_t conj = grid.conjugate_index(f);
    if (inf_norm == 0 || inf_norm > max_mode || conj < f) continue;
    const double amp = std::pow(std::sqrt(grid.k_squared(f)), -decay);
    for (int j = 0; j < grid.dim(); ++j) {
      const Complex c(amp * stream.normal(), amp * stream.normal());
      coeffs[j][f] = c;
      coeffs[j][conj] = std::conj(c);
    }
  }
  VectorField v = VectorField::from_spectral(grid, std::move(coeffs));
  if (divergence_free) v = leray_project(v);
  const double norm = l2_norm_of(v);
  if (norm == 0.0) return v;
  return (l2_norm / norm) * v;
}

}  // namespace ciflow
