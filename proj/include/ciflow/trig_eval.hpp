#pragma once

#include <array>
#include <vector>

#include "ciflow/vector_field.hpp"

namespace ciflow {

/// Exact trigonometric-interpolant evaluation of a real field at arbitrary
/// points. Built once per field; evaluation is read-only and thread-safe.
///
/// Only the upper half of the spectrum is stored (the field is real), and
/// modes with max_j |v_j(k)| <= prune_relative * max |v| are dropped; the
/// default threshold sits at round-off. Coefficients on a Nyquist index are
/// split evenly over the +-N/2 images so the interpolant is real and still
/// reproduces the grid samples.
class TrigEvaluator {
 public:
  static constexpr double kDefaultPrune = 1e-14;

  explicit TrigEvaluator(const VectorField& v, double prune_relative = kDefaultPrune);

  int dim() const { return dim_; }
  std::size_t mode_count() const { return modes_.size(); }
  bool is_zero() const { return modes_.empty() && mean_ == Vec{}; }

  Vec value(const Vec& x) const;
  void value_and_gradient(const Vec& x, Vec& value, Mat& gradient) const;

 private:
  template <bool WithGradient>
  void evaluate(const Vec& x, Vec& value, Mat* gradient) const;

  int dim_;
  double scale_;
  std::array<int, kMaxDim> reach_{};
  Vec mean_{};
  std::vector<std::array<int, kMaxDim>> modes_;
  std::vector<double> coeff_re_;  // mode-major, dim_ entries per mode, doubled
  std::vector<double> coeff_im_;
};

std::vector<Vec> sample_at(const VectorField& v, const std::vector<Vec>& points);
/// Row j, column m holds d v_j / d x_m.
std::vector<Mat> gradient_at(const VectorField& v, const std::vector<Vec>& points);

}  // namespace ciflow
