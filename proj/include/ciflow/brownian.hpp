#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ciflow {

/// M independent d-dimensional Brownian increment paths on a uniform grid
/// of `steps` substeps of size `step_size`. Increment (m, j) covers
/// [j delta, (j+1) delta] and is a pure function of (master_seed, m, j), so
/// the ensemble does not depend on how generation is scheduled, and the
/// first M' samples of a larger ensemble equal an ensemble of size M'.
class BrownianEnsemble {
 public:
  static BrownianEnsemble generate(int samples, int steps, double step_size, int dim, std::uint64_t master_seed);

  int samples() const { return samples_; }
  int steps() const { return steps_; }
  double step_size() const { return step_size_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  double horizon() const { return step_size_ * steps_; }

  /// Row-major [step][component] increments of sample m.
  std::span<const double> path(int m) const {
    const std::size_t stride = static_cast<std::size_t>(steps_) * dim_;
    return {increments_.data() + stride * static_cast<std::size_t>(m), stride};
  }

  /// Number of substeps spanning [0, t]; throws when t is not on the substep grid.
  int steps_for(double t) const;

  /// Ensemble restricted to its first `count` samples.
  BrownianEnsemble leading(int count) const;

 private:
  BrownianEnsemble() = default;

  int samples_ = 0;
  int steps_ = 0;
  double step_size_ = 0.0;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> increments_;
};

}  // namespace ciflow
