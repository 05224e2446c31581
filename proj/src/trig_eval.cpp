#include "ciflow/trig_eval.hpp"

#include <cmath>
#include <map>

namespace ciflow {
namespace {

bool upper_half(const std::array<int, kMaxDim>& m, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (m[a] != 0) return m[a] > 0;
  }
  return false;
}

constexpr int kTable = 2 * (SpectralGrid::kMaxPoints / 2) + 1;

}  // namespace

TrigEvaluator::TrigEvaluator(const VectorField& v, double prune_relative)
    : dim_(v.dim()), scale_(v.grid().wavenumber_scale()) {
  const auto& grid = v.grid();
  double largest = 0.0;
  for (int j = 0; j < dim_; ++j)
    for (const auto& c : v.spectral(j)) largest = std::max(largest, std::abs(c));
  if (largest == 0.0) return;
  const double cutoff = prune_relative * largest;
  const int nyquist = -grid.n() / 2;

  std::map<std::array<int, kMaxDim>, std::array<Complex, kMaxDim>> images;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    double amp = 0.0;
    for (int j = 0; j < dim_; ++j) amp = std::max(amp, std::abs(v.spectral(j)[f]));
    if (amp <= cutoff) continue;
    const auto m = grid.modes(f);
    if (f == 0) {
      for (int j = 0; j < dim_; ++j) mean_[j] = v.spectral(j)[0].real();
      continue;
    }
    int nyquist_axes = 0;
    for (int a = 0; a < dim_; ++a) nyquist_axes += m[a] == nyquist ? 1 : 0;
    const int count = 1 << nyquist_axes;
    const double share = 1.0 / count;
    for (int img = 0; img < count; ++img) {
      auto w = m;
      int bit = 0;
      for (int a = 0; a < dim_; ++a) {
        if (m[a] != nyquist) continue;
        if ((img >> bit) & 1) w[a] = -nyquist;
        ++bit;
      }
      if (!upper_half(w, dim_)) continue;
      auto& slot = images[w];
      for (int j = 0; j < dim_; ++j) slot[j] += 2.0 * share * v.spectral(j)[f];
    }
  }

  for (const auto& [w, c] : images) {
    modes_.push_back(w);
    for (int j = 0; j < dim_; ++j) {
      coeff_re_.push_back(c[j].real());
      coeff_im_.push_back(c[j].imag());
    }
    for (int a = 0; a < dim_; ++a) reach_[a] = std::max(reach_[a], std::abs(w[a]));
  }
}

template <bool WithGradient>
void TrigEvaluator::evaluate(const Vec& x, Vec& value, Mat* gradient) const {
  value = mean_;
  if constexpr (WithGradient) gradient->fill(0.0);
  if (modes_.empty()) return;

  // e^{i m theta_a} for |m| <= reach_a, stored at offset reach_a.
  std::array<std::array<double, kTable>, kMaxDim> pr;
  std::array<std::array<double, kTable>, kMaxDim> pi;
  for (int a = 0; a < dim_; ++a) {
    const int r = reach_[a];
    const double theta = scale_ * x[a];
    const double c = std::cos(theta), s = std::sin(theta);
    pr[a][r] = 1.0;
    pi[a][r] = 0.0;
    for (int m = 1; m <= r; ++m) {
      const double re = pr[a][r + m - 1] * c - pi[a][r + m - 1] * s;
      const double im = pr[a][r + m - 1] * s + pi[a][r + m - 1] * c;
      pr[a][r + m] = re;
      pi[a][r + m] = im;
      pr[a][r - m] = re;
      pi[a][r - m] = -im;
    }
  }

  Vec acc{};
  Mat gacc{};
  const double* cre = coeff_re_.data();
  const double* cim = coeff_im_.data();
  for (const auto& m : modes_) {
    double er = pr[0][reach_[0] + m[0]];
    double ei = pi[0][reach_[0] + m[0]];
    for (int a = 1; a < dim_; ++a) {
      const double br = pr[a][reach_[a] + m[a]];
      const double bi = pi[a][reach_[a] + m[a]];
      const double re = er * br - ei * bi;
      ei = er * bi + ei * br;
      er = re;
    }
    for (int j = 0; j < dim_; ++j) {
      const double zr = cre[j] * er - cim[j] * ei;
      acc[j] += zr;
      if constexpr (WithGradient) {
        const double zi = cre[j] * ei + cim[j] * er;
        for (int a = 0; a < dim_; ++a) gacc[j * kMaxDim + a] += m[a] * zi;
      }
    }
    cre += dim_;
    cim += dim_;
  }
  for (int j = 0; j < dim_; ++j) value[j] += acc[j];
  if constexpr (WithGradient) {
    for (int j = 0; j < dim_; ++j)
      for (int a = 0; a < dim_; ++a) at(*gradient, j, a) = -scale_ * gacc[j * kMaxDim + a];
  }
}

Vec TrigEvaluator::value(const Vec& x) const {
  Vec v{};
  evaluate<false>(x, v, nullptr);
  return v;
}

void TrigEvaluator::value_and_gradient(const Vec& x, Vec& value, Mat& gradient) const {
  evaluate<true>(x, value, &gradient);
}

std::vector<Vec> sample_at(const VectorField& v, const std::vector<Vec>& points) {
  const TrigEvaluator eval(v);
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval.value(p));
  return out;
}

std::vector<Mat> gradient_at(const VectorField& v, const std::vector<Vec>& points) {
  const TrigEvaluator eval(v);
  std::vector<Mat> out;
  out.reserve(points.size());
  Vec val{};
  Mat grad{};
  for (const auto& p : points) {
    eval.value_and_gradient(p, val, grad);
    out.push_back(grad);
  }
  return out;
}

}  // namespace ciflow
