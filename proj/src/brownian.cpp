#include "ciflow/brownian.hpp"

#include <cmath>
#include <string>

#include "ciflow/rng.hpp"
#include "ciflow/types.hpp"

namespace ciflow {

BrownianEnsemble BrownianEnsemble::generate(int samples, int steps, double step_size, int dim,
                                            std::uint64_t master_seed) {
  if (samples < 1) throw PreconditionError("ensemble needs at least one sample");
  if (steps < 1) throw PreconditionError("ensemble needs at least one step");
  if (!(step_size > 0.0)) throw PreconditionError("substep size must be positive");
  if (dim < 1 || dim > kMaxDim) throw PreconditionError("ensemble dimension out of range");

  BrownianEnsemble e;
  e.samples_ = samples;
  e.steps_ = steps;
  e.step_size_ = step_size;
  e.dim_ = dim;
  e.seed_ = master_seed;
  e.increments_.resize(static_cast<std::size_t>(samples) * steps * dim);

  const rng::Key key = rng::make_key(master_seed);
  const double scale = std::sqrt(step_size);
  const int blocks = (dim + 1) / 2;  // two normals per Philox block
#pragma omp parallel for schedule(static)
  for (int m = 0; m < samples; ++m) {
    double* out = e.increments_.data() + static_cast<std::size_t>(m) * steps * dim;
    for (int j = 0; j < steps; ++j) {
      for (int b = 0; b < blocks; ++b) {
        const rng::Counter ctr{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(b),
                               static_cast<std::uint32_t>(m), 0x0b0b1e5u};
        const auto [z0, z1] = rng::normal_pair(ctr, key);
        out[j * dim + 2 * b] = scale * z0;
        if (2 * b + 1 < dim) out[j * dim + 2 * b + 1] = scale * z1;
      }
    }
  }
  return e;
}

int BrownianEnsemble::steps_for(double t) const {
  const double r = t / step_size_;
  const long j = std::lround(r);
  if (!(t >= 0.0) || std::abs(r - static_cast<double>(j)) > 1e-9 * std::max(1.0, r) || j > steps_)
    throw PreconditionError("time " + std::to_string(t) + " is not covered by the Brownian ensemble substep grid");
  return static_cast<int>(j);
}

BrownianEnsemble BrownianEnsemble::leading(int count) const {
  if (count < 1 || count > samples_) throw PreconditionError("leading(): sample count out of range");
  BrownianEnsemble e = *this;
  e.samples_ = count;
  e.increments_.resize(static_cast<std::size_t>(count) * steps_ * dim_);
  return e;
}

}  // namespace ciflow
