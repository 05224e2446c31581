#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ciflow {

inline constexpr int kMaxDim = 3;

using Complex = std::complex<double>;

/// Position or velocity in up to three dimensions; entries past dim() are zero.
using Vec = std::array<double, kMaxDim>;

/// d x d matrix stored row-major with a fixed stride of kMaxDim.
using Mat = std::array<double, kMaxDim * kMaxDim>;

inline constexpr double& at(Mat& m, int row, int col) { return m[row * kMaxDim + col]; }
inline constexpr double at(const Mat& m, int row, int col) { return m[row * kMaxDim + col]; }

inline Mat identity_matrix(int dim) {
  Mat m{};
  for (int i = 0; i < dim; ++i) at(m, i, i) = 1.0;
  return m;
}

/// Violated operation precondition (bad argument, mismatched grids, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Picard iteration in a Duhamel step did not reach tolerance.
class PicardFailure : public std::runtime_error {
 public:
  PicardFailure(const std::string& what, double residual, double time)
      : std::runtime_error(what), residual_(residual), time_(time) {}
  double residual() const noexcept { return residual_; }
  double time() const noexcept { return time_; }

 private:
  double residual_;
  double time_;
};

/// Outer fixed point of the self-consistent stochastic solve did not settle.
class OuterIterationFailure : public std::runtime_error {
 public:
  OuterIterationFailure(const std::string& what, std::vector<double> deltas)
      : std::runtime_error(what), deltas_(std::move(deltas)) {}
  const std::vector<double>& deltas() const noexcept { return deltas_; }

 private:
  std::vector<double> deltas_;
};

}  // namespace ciflow
