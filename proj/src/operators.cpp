#include "ciflow/operators.hpp"

#include <cmath>
#include <string>

#include "ciflow/rng.hpp"
#include "fft.hpp"

namespace ciflow {
namespace {

void require_nonnegative_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw PreconditionError("semigroup time must be finite and >= 0");
}

void require_viscosity(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw PreconditionError("viscosity must be positive");
}

std::vector<double> to_physical(const SpectralGrid& grid, std::span<const Complex> coeffs) {
  std::vector<Complex> buf(grid.size());
  fft::inverse(grid, coeffs, buf);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = buf[i].real();
  return out;
}

std::vector<Complex> to_spectral(const SpectralGrid& grid, const std::vector<double>& samples) {
  std::vector<Complex> buf(samples.begin(), samples.end());
  std::vector<Complex> out(grid.size());
  fft::forward(grid, buf, out);
  return out;
}

// i k_axis c, with the Nyquist derivative set to zero so derivatives of real
// fields stay real.
std::vector<Complex> derivative(const SpectralGrid& grid, std::span<const Complex> c, int axis) {
  std::vector<Complex> out(grid.size());
  const int nyquist = -grid.n() / 2;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    if (grid.modes(f)[axis] == nyquist) continue;
    out[f] = Complex(0.0, grid.wavenumber(f, axis)) * c[f];
  }
  return out;
}

void truncate(const SpectralGrid& grid, std::vector<Complex>& c) {
  for (std::size_t f = 0; f < grid.size(); ++f)
    if (!grid.dealiased(f)) c[f] = 0.0;
}

VectorField finish_nonlinear(const SpectralGrid& grid, VectorField::Components rhs) {
  for (auto& comp : rhs) {
    truncate(grid, comp);
    for (auto& c : comp) c = -c;
  }
  return leray_project(VectorField::from_spectral(grid, std::move(rhs)));
}

}  // namespace

VectorField leray_project(const VectorField& v) {
  const auto& grid = v.grid();
  const int d = grid.dim();
  VectorField::Components out = v.spectral();
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const double k2 = grid.k_squared(f);
    if (k2 == 0.0) continue;
    Complex kv = 0.0;
    for (int j = 0; j < d; ++j) kv += grid.wavenumber(f, j) * out[j][f];
    const Complex scale = kv / k2;
    for (int j = 0; j < d; ++j) out[j][f] -= grid.wavenumber(f, j) * scale;
  }
  return VectorField::from_spectral(grid, std::move(out));
}

VectorField heat_semigroup(double t, double nu, const VectorField& v) {
  require_nonnegative_time(t);
  require_viscosity(nu);
  if (t == 0.0) return v;
  const auto& grid = v.grid();
  return apply_multiplier(v, [&](std::size_t f) { return std::exp(-nu * grid.k_squared(f) * t); });
}

VectorField fractional_stokes_semigroup(double alpha, double t, double nu, const VectorField& v) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("fractional power must lie in (0, 1]");
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("A^alpha S(t) is singular at t = 0; need t > 0");
  require_viscosity(nu);
  const auto& grid = v.grid();
  return apply_multiplier(v, [&](std::size_t f) {
    const double k2 = grid.k_squared(f);
    return k2 == 0.0 ? 0.0 : std::pow(k2, alpha) * std::exp(-nu * k2 * t);
  });
}

double mollifier_multiplier(int n, double k_squared) {
  const double inv = 1.0 / static_cast<double>(n);
  return std::exp(-0.5 * k_squared * inv * inv);
}

VectorField mollify(int n, const VectorField& v) {
  if (n < 1) throw PreconditionError("mollification level must be >= 1");
  const auto& grid = v.grid();
  return apply_multiplier(v, [&](std::size_t f) { return mollifier_multiplier(n, grid.k_squared(f)); });
}

VectorField dealias(const VectorField& v) {
  const auto& grid = v.grid();
  return apply_multiplier(v, [&](std::size_t f) { return grid.dealiased(f) ? 1.0 : 0.0; });
}

VectorField nonlinear_term(const VectorField& u) {
  const auto& grid = u.grid();
  const int d = grid.dim();
  const VectorField ut = dealias(u);
  std::vector<std::vector<double>> phys;
  for (int j = 0; j < d; ++j) phys.push_back(to_physical(grid, ut.spectral(j)));

  VectorField::Components rhs(static_cast<std::size_t>(d), std::vector<Complex>(grid.size()));
  std::vector<double> prod(grid.size());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (std::size_t p = 0; p < grid.size(); ++p) prod[p] = phys[i][p] * phys[j][p];
      auto w = to_spectral(grid, prod);
      truncate(grid, w);
      // d_j (u_i u_j) feeds component i; d_i (u_i u_j) feeds component j.
      for (std::size_t f = 0; f < grid.size(); ++f) {
        rhs[i][f] += Complex(0.0, grid.wavenumber(f, j)) * w[f];
        if (j != i) rhs[j][f] += Complex(0.0, grid.wavenumber(f, i)) * w[f];
      }
    }
  }
  return finish_nonlinear(grid, std::move(rhs));
}

VectorField nonlinear_term_advective(const VectorField& u) {
  const auto& grid = u.grid();
  const int d = grid.dim();
  const VectorField ut = dealias(u);
  std::vector<std::vector<double>> phys;
  for (int j = 0; j < d; ++j) phys.push_back(to_physical(grid, ut.spectral(j)));

  VectorField::Components rhs;
  std::vector<double> acc(grid.size());
  for (int i = 0; i < d; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < d; ++j) {
      const auto grad = to_physical(grid, derivative(grid, ut.spectral(i), j));
      for (std::size_t p = 0; p < grid.size(); ++p) acc[p] += phys[j][p] * grad[p];
    }
    rhs.push_back(to_spectral(grid, acc));
  }
  return finish_nonlinear(grid, std::move(rhs));
}

VectorField pointwise_product(const VectorField& f, const VectorField& g) {
  require_same_grid(f, g, "pointwise_product");
  const auto& grid = f.grid();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(grid.dim()), std::vector<double>(grid.size()));
  for (int j = 0; j < grid.dim(); ++j) {
    const auto a = f.physical(j);
    const auto b = g.physical(j);
    for (std::size_t p = 0; p < grid.size(); ++p) out[j][p] = a[p] * b[p];
  }
  return VectorField::from_physical(grid, out);
}

VectorField gradient_of_scalar(const SpectralGrid& grid, std::span<const Complex> q) {
  if (q.size() != grid.size()) throw PreconditionError("scalar coefficient array does not match grid");
  VectorField::Components out;
  for (int a = 0; a < grid.dim(); ++a) out.push_back(derivative(grid, q, a));
  return VectorField::from_spectral(grid, std::move(out));
}

double sobolev_norm(SobolevIndex s, const VectorField& v) {
  const auto& grid = v.grid();
  double sum = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    double modal = 0.0;
    for (int j = 0; j < grid.dim(); ++j) modal += std::norm(v.spectral(j)[f]);
    if (modal == 0.0) continue;
    sum += std::pow(1.0 + grid.k_squared(f), s.s) * modal;
  }
  return std::sqrt(sum);
}

double l2_norm_of(const VectorField& v) { return sobolev_norm(SobolevIndex{0.0}, v); }

double inner_product(const VectorField& u, const VectorField& v) {
  require_same_grid(u, v, "inner_product");
  double sum = 0.0;
  for (int j = 0; j < u.dim(); ++j) {
    const auto a = u.spectral(j);
    const auto b = v.spectral(j);
    for (std::size_t f = 0; f < a.size(); ++f) sum += a[f].real() * b[f].real() + a[f].imag() * b[f].imag();
  }
  return sum;
}

double divergence_norm(const VectorField& v) {
  const auto& grid = v.grid();
  double sum = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    Complex div = 0.0;
    for (int j = 0; j < grid.dim(); ++j) div += Complex(0.0, grid.wavenumber(f, j)) * v.spectral(j)[f];
    sum += std::norm(div);
  }
  return std::sqrt(sum);
}

double holder_seminorm(double alpha, const VectorField& v, const HolderOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("Holder exponent must lie in (0, 1)");
  const auto& grid = v.grid();
  const int d = grid.dim();
  const int n = grid.n();
  const double h = grid.spacing();

  // Grid offsets with 0 < |o| h <= 1, one of each +-o pair.
  const int reach = std::min(static_cast<int>(std::floor(1.0 / h)), n / 2 - 1);
  struct Offset {
    std::array<int, kMaxDim> o;
    double weight;  // 1 / |o h|^alpha
  };
  std::vector<Offset> offsets;
  std::array<int, kMaxDim> o{};
  const int span = 2 * reach + 1;
  std::size_t combos = 1;
  for (int a = 0; a < d; ++a) combos *= static_cast<std::size_t>(span);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rem = c;
    double r2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      o[a] = static_cast<int>(rem % span) - reach;
      rem /= span;
      r2 += (o[a] * h) * (o[a] * h);
    }
    bool positive = false;
    for (int a = 0; a < d; ++a) {
      if (o[a] != 0) {
        positive = o[a] > 0;
        break;
      }
    }
    if (!positive || r2 > 1.0 + 1e-12) continue;
    offsets.push_back({o, std::pow(std::sqrt(r2), -alpha)});
  }
  if (offsets.empty()) return 0.0;

  std::vector<std::span<const double>> comps;
  for (int j = 0; j < d; ++j) comps.push_back(v.physical(j));
  auto ratio = [&](std::size_t base, const Offset& off) {
    auto idx = grid.axis_indices(base);
    for (int a = 0; a < d; ++a) idx[a] += off.o[a];
    const std::size_t other = grid.flat_index(idx);
    double diff2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dv = comps[j][base] - comps[j][other];
      diff2 += dv * dv;
    }
    return std::sqrt(diff2) * off.weight;
  };

  double best = 0.0;
  const std::size_t pairs = grid.size() * offsets.size();
  if (pairs <= options.exhaustive_limit) {
    for (const auto& off : offsets)
      for (std::size_t base = 0; base < grid.size(); ++base) best = std::max(best, ratio(base, off));
    return best;
  }
  rng::Stream stream(options.seed, 0);
  for (std::size_t s = 0; s < options.sampled_pairs; ++s) {
    const std::size_t base = stream.bits() % grid.size();
    const std::size_t k = stream.bits() % offsets.size();
    best = std::max(best, ratio(base, offsets[k]));
  }
  return best;
}

}  // namespace ciflow
