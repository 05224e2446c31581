#include "ciflow/flow_kernels.hpp"

#include <cmath>

namespace ciflow::kernels {
namespace {

// J <- J + h G J
inline void jacobian_update(Mat& jac, const Mat& grad, double h, int dim) {
  Mat next = jac;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      double gj = 0.0;
      for (int m = 0; m < dim; ++m) gj += at(grad, j, m) * at(jac, m, k);
      at(next, j, k) += h * gj;
    }
  jac = next;
}

inline Vec pullback(const Mat& jac, const Vec& u, int dim) {
  Vec w{};
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) w[j] += at(jac, i, j) * u[i];
  return w;
}

inline double frobenius2(const Mat& a, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) s += at(a, j, k) * at(a, j, k);
  return s;
}

inline double frobenius_gap2(const Mat& a, const Mat& b, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      const double d = at(a, j, k) - at(b, j, k);
      s += d * d;
    }
  return s;
}

}  // namespace

double torus_distance(const Vec& a, const Vec& b, int dim, double period) {
  double r2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    double d = a[k] - b[k];
    d -= period * std::round(d / period);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

Vec wrap_to_torus(const Vec& x, int dim, double period) {
  Vec y = x;
  for (int k = 0; k < dim; ++k) {
    y[k] -= period * std::floor(y[k] / period);
    if (y[k] >= period) y[k] -= period;
  }
  return y;
}

void integrate_backward(const DriftHistory& drift, int steps, double delta, double sigma,
                        std::span<const double> increments, const Vec& x, Vec& y, Mat& jac, PathTrace trace) {
  const int dim = drift.dim();
  const bool zero = drift.is_zero();
  y = x;
  jac = identity_matrix(dim);
  if (trace.positions) trace.positions[steps] = y;
  if (trace.jacobians) trace.jacobians[steps] = jac;
  Vec b{};
  Mat grad{};
  for (int k = steps; k >= 1; --k) {
    const double* db = increments.data() + static_cast<std::size_t>(k - 1) * dim;
    if (!zero) drift.evaluate(k * delta, y, b, grad);
    for (int j = 0; j < dim; ++j) y[j] = y[j] - delta * b[j] - sigma * db[j];
    if (!zero) jacobian_update(jac, grad, -delta, dim);
    if (trace.positions) trace.positions[k - 1] = y;
    if (trace.jacobians) trace.jacobians[k - 1] = jac;
  }
}

void integrate_forward(const DriftHistory& drift, int first_step, int steps, double delta, double sigma,
                       std::span<const double> increments, const Vec& x, Vec& y, Mat& jac) {
  const int dim = drift.dim();
  const bool zero = drift.is_zero();
  y = x;
  jac = identity_matrix(dim);
  Vec b{};
  Mat grad{};
  for (int k = first_step; k < first_step + steps; ++k) {
    const double* db = increments.data() + static_cast<std::size_t>(k) * dim;
    if (!zero) drift.evaluate(k * delta, y, b, grad);
    for (int j = 0; j < dim; ++j) y[j] = y[j] + delta * b[j] + sigma * db[j];
    if (!zero) jacobian_update(jac, grad, delta, dim);
  }
}

void backward_endpoints(const DriftHistory& drift, int steps, double sigma, const BrownianEnsemble& noise,
                        std::span<const Vec> points, std::vector<Vec>& y, std::vector<Mat>& jac,
                        Execution policy) {
  const std::size_t P = points.size();
  const auto M = static_cast<std::size_t>(noise.samples());
  y.assign(M * P, Vec{});
  jac.assign(M * P, Mat{});
  for_each_point(P, policy, [&](std::size_t i) {
    for (std::size_t m = 0; m < M; ++m)
      integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(static_cast<int>(m)), points[i],
                         y[m * P + i], jac[m * P + i]);
  });
}

void forward_endpoints(const DriftHistory& drift, int first_step, int steps, double sigma,
                       const BrownianEnsemble& noise, std::span<const Vec> points, std::vector<Vec>& x,
                       std::vector<Mat>& jac, Execution policy) {
  const std::size_t P = points.size();
  const auto M = static_cast<std::size_t>(noise.samples());
  x.assign(M * P, Vec{});
  jac.assign(M * P, Mat{});
  for_each_point(P, policy, [&](std::size_t i) {
    for (std::size_t m = 0; m < M; ++m)
      integrate_forward(drift, first_step, steps, noise.step_size(), sigma, noise.path(static_cast<int>(m)),
                        points[i], x[m * P + i], jac[m * P + i]);
  });
}

PullbackMoments pullback_moments(const DriftHistory& drift, const TrigEvaluator& u0, int steps, double sigma,
                                 const BrownianEnsemble& noise, std::span<const Vec> points,
                                 std::span<const int> sample_counts, Execution policy) {
  const int dim = drift.dim();
  const std::size_t P = points.size();
  const std::size_t K = sample_counts.size();
  PullbackMoments out;
  out.sample_counts.assign(sample_counts.begin(), sample_counts.end());
  out.mean.assign(K * P, Vec{});
  out.std_error.assign(K * P, Vec{});
  const int M = sample_counts.empty() ? 0 : sample_counts.back();

  for_each_point(P, policy, [&](std::size_t i) {
    // Welford accumulation in sample order.
    Vec mean{}, m2{};
    std::size_t next = 0;
    Vec y{};
    Mat jac{};
    for (int m = 0; m < M; ++m) {
      integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(m), points[i], y, jac);
      const Vec w = pullback(jac, u0.value(y), dim);
      const double count = m + 1;
      for (int j = 0; j < dim; ++j) {
        const double d = w[j] - mean[j];
        mean[j] += d / count;
        m2[j] += d * (w[j] - mean[j]);
      }
      while (next < K && sample_counts[next] == m + 1) {
        out.mean[next * P + i] = mean;
        for (int j = 0; j < dim; ++j)
          out.std_error[next * P + i][j] = m > 0 ? std::sqrt(m2[j] / (count * (count - 1.0))) : 0.0;
        ++next;
      }
    }
  });
  return out;
}

SplitMoments split_moments(const DriftHistory& drift_n, const DriftHistory& drift, const TrigEvaluator& u0_n,
                           const TrigEvaluator& u0, int steps, double sigma, const BrownianEnsemble& noise,
                           std::span<const Vec> points, Execution policy) {
  const int dim = drift.dim();
  const std::size_t P = points.size();
  const int M = noise.samples();
  SplitMoments out;
  out.a1.assign(P, Vec{});
  out.a2.assign(P, Vec{});
  out.a3.assign(P, Vec{});
  out.jac_second_moment.assign(P, 0.0);

  for_each_point(P, policy, [&](std::size_t i) {
    Vec s1{}, s2{}, s3{};
    double sj = 0.0;
    Vec yn{}, y{};
    Mat jn{}, jac{};
    for (int m = 0; m < M; ++m) {
      integrate_backward(drift_n, steps, noise.step_size(), sigma, noise.path(m), points[i], yn, jn);
      integrate_backward(drift, steps, noise.step_size(), sigma, noise.path(m), points[i], y, jac);
      const Vec un_at_yn = u0_n.value(yn);
      const Vec u_at_yn = u0.value(yn);
      const Vec u_at_y = u0.value(y);
      Vec d1{}, d2{};
      for (int j = 0; j < dim; ++j) {
        d1[j] = un_at_yn[j] - u_at_yn[j];
        d2[j] = u_at_yn[j] - u_at_y[j];
      }
      Mat jdiff{};
      for (int k = 0; k < kMaxDim * kMaxDim; ++k) jdiff[k] = jn[k] - jac[k];
      const Vec w1 = pullback(jn, d1, dim);
      const Vec w2 = pullback(jn, d2, dim);
      const Vec w3 = pullback(jdiff, u_at_y, dim);
      for (int j = 0; j < dim; ++j) {
        s1[j] += w1[j];
        s2[j] += w2[j];
        s3[j] += w3[j];
      }
      sj += frobenius2(jn, dim);
    }
    for (int j = 0; j < dim; ++j) {
      out.a1[i][j] = s1[j] / M;
      out.a2[i][j] = s2[j] / M;
      out.a3[i][j] = s3[j] / M;
    }
    out.jac_second_moment[i] = sj / M;
  });
  return out;
}

PathSupMoments path_sup_moments(std::span<const DriftHistory* const> drifts, const DriftHistory& limit, int steps,
                                double sigma, double p, const BrownianEnsemble& noise, std::span<const Vec> points,
                                Execution policy) {
  const int dim = limit.dim();
  const double period = limit.grid().period();
  const std::size_t P = points.size();
  const std::size_t D = drifts.size();
  const int M = noise.samples();
  PathSupMoments out;
  out.position_gap.assign(D * P, 0.0);
  out.jacobian_gap.assign(D * P, 0.0);
  out.jacobian_power.assign(D * P, 0.0);
  out.jacobian_power_se.assign(D * P, 0.0);

  for_each_point(P, policy, [&](std::size_t i) {
    const auto len = static_cast<std::size_t>(steps) + 1;
    std::vector<Vec> ref_pos(len), pos(len);
    std::vector<Mat> ref_jac(len), jac(len);
    std::vector<double> gap(D, 0.0), jgap(D, 0.0), jpow_mean(D, 0.0), jpow_m2(D, 0.0);
    Vec y{};
    Mat j_end{};
    for (int m = 0; m < M; ++m) {
      integrate_backward(limit, steps, noise.step_size(), sigma, noise.path(m), points[i], y, j_end,
                         {ref_pos.data(), ref_jac.data()});
      for (std::size_t n = 0; n < D; ++n) {
        integrate_backward(*drifts[n], steps, noise.step_size(), sigma, noise.path(m), points[i], y, j_end,
                           {pos.data(), jac.data()});
        double sup_gap = 0.0, sup_jgap = 0.0, sup_jpow = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
          sup_gap = std::max(sup_gap, torus_distance(pos[k], ref_pos[k], dim, period));
          sup_jgap = std::max(sup_jgap, std::sqrt(frobenius_gap2(jac[k], ref_jac[k], dim)));
          sup_jpow = std::max(sup_jpow, std::sqrt(frobenius2(jac[k], dim)));
        }
        gap[n] += std::pow(sup_gap, p);
        jgap[n] += std::pow(sup_jgap, p);
        const double v = std::pow(sup_jpow, p);
        const double d = v - jpow_mean[n];
        jpow_mean[n] += d / (m + 1);
        jpow_m2[n] += d * (v - jpow_mean[n]);
      }
    }
    for (std::size_t n = 0; n < D; ++n) {
      out.position_gap[n * P + i] = gap[n] / M;
      out.jacobian_gap[n * P + i] = jgap[n] / M;
      out.jacobian_power[n * P + i] = jpow_mean[n];
      out.jacobian_power_se[n * P + i] = M > 1 ? std::sqrt(jpow_m2[n] / (static_cast<double>(M) * (M - 1))) : 0.0;
    }
  });
  return out;
}

}  // namespace ciflow::kernels
