#include "ciflow/mild_solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ciflow {

void SolverParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be positive");
  if (!(picard_tol > 0.0)) throw PreconditionError("Picard tolerance must be positive");
  if (max_picard < 1) throw PreconditionError("max Picard iterations must be >= 1");
}

MildSolution::MildSolution(SobolevIndex s, double nu, double dt, std::vector<VectorField> fields,
                           std::vector<StepRecord> records)
    : s_(s), nu_(nu), dt_(dt), fields_(std::move(fields)), records_(std::move(records)) {
  if (fields_.empty()) throw PreconditionError("a mild solution needs at least the initial field");
  if (records_.size() != fields_.size()) throw PreconditionError("one step record per node expected");
}

std::size_t MildSolution::node_of(double t) const {
  const double r = t / dt_;
  const double j = std::round(r);
  if (!(t >= 0.0) || std::abs(r - j) > 1e-9 || j >= static_cast<double>(fields_.size()))
    throw PreconditionError("time " + std::to_string(t) + " is not a node of the solution grid");
  return static_cast<std::size_t>(j);
}

double MildSolution::max_hs_norm() const {
  double m = 0.0;
  for (const auto& r : records_) m = std::max(m, r.hs_norm);
  return m;
}

VectorField duhamel_step(const VectorField& u, double dt, double nu, const SolverParams& params, SobolevIndex s,
                         StepRecord* record) {
  params.validate();
  const VectorField su = heat_semigroup(dt, nu, u);
  StepRecord local;
  VectorField v = su;
  if (!params.linear) {
    const VectorField sbu = heat_semigroup(dt, nu, nonlinear_term(u));
    v = su + dt * sbu;  // exponential Euler predictor
    local.picard_iterations = 1;
    if (params.quadrature == DuhamelQuadrature::ExponentialTrapezoidal) {
      const VectorField base = su + (0.5 * dt) * sbu;
      local.picard_iterations = 0;
      double residual = std::numeric_limits<double>::infinity();
      while (residual > params.picard_tol) {
        if (local.picard_iterations == params.max_picard) {
          std::ostringstream msg;
          msg << "Picard iteration did not converge in " << params.max_picard << " iterations (residual "
              << residual << "); reduce dt or the data size";
          throw PicardFailure(msg.str(), residual, dt);
        }
        VectorField next = base + (0.5 * dt) * nonlinear_term(v);
        residual = sobolev_norm(s, next - v);
        v = std::move(next);
        ++local.picard_iterations;
        if (!std::isfinite(residual)) throw PicardFailure("Picard iteration diverged", residual, dt);
      }
      local.residual = residual;
    }
  }
  local.hs_norm = sobolev_norm(s, v);
  local.l2_norm = l2_norm_of(v);
  local.divergence = divergence_norm(v);
  if (record) *record = local;
  return v;
}

MildSolution solve_mild(const VectorField& u0, double T, double nu, SobolevIndex s, const SolverParams& params) {
  params.validate();
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  if (!s.admissible(u0.dim())) throw PreconditionError("Sobolev index must exceed d/2");
  if (!(T >= 0.0)) throw PreconditionError("final time must be >= 0");
  const double steps_real = T / params.dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
    throw PreconditionError("final time must be an integer multiple of dt");

  std::vector<VectorField> fields{u0};
  std::vector<StepRecord> records(1);
  records[0].hs_norm = sobolev_norm(s, u0);
  records[0].l2_norm = l2_norm_of(u0);
  records[0].divergence = divergence_norm(u0);
  fields.reserve(static_cast<std::size_t>(steps) + 1);
  records.reserve(static_cast<std::size_t>(steps) + 1);
  for (long j = 0; j < steps; ++j) {
    StepRecord rec;
    try {
      fields.push_back(duhamel_step(fields.back(), params.dt, nu, params, s, &rec));
    } catch (const PicardFailure& e) {
      const double t_fail = params.dt * static_cast<double>(j + 1);
      std::ostringstream msg;
      msg << "mild solve failed at t = " << t_fail << ": " << e.what();
      throw PicardFailure(msg.str(), e.residual(), t_fail);
    }
    records.push_back(rec);
  }
  return MildSolution(s, nu, params.dt, std::move(fields), std::move(records));
}

double local_existence_time(const VectorField& u0, SobolevIndex s, double nu, double m_fit, double safety) {
  if (!(m_fit > 0.0)) throw PreconditionError("fitted contraction constant must be positive");
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  const double norm = sobolev_norm(s, u0);
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  const double root = safety / (m_fit * norm);
  return root * root;
}

double stability_ratio(const MildSolution& u, const MildSolution& u_n, const VectorField& u0,
                       const VectorField& u0_n, SobolevIndex s) {
  if (!(u.grid() == u_n.grid())) throw PreconditionError("stability_ratio: solutions on different grids");
  if (u.node_count() != u_n.node_count() || u.dt() != u_n.dt())
    throw PreconditionError("stability_ratio: solutions on different time grids");
  double numerator = 0.0;
  for (std::size_t j = 0; j < u.node_count(); ++j)
    numerator = std::max(numerator, sobolev_norm(s, u.at(j) - u_n.at(j)));
  if (numerator <= 1e-14) return 0.0;
  return numerator / sobolev_norm(s, u0 - u0_n);
}

double fit_product_constant(const SpectralGrid& grid, SobolevIndex s, int pairs, std::uint64_t seed) {
  const int band = std::max(1, grid.n() / 4 - 1);
  double best = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const auto f = random_field(grid, seed + 2 * static_cast<std::uint64_t>(p), band, 1.0, false);
    const auto g = random_field(grid, seed + 2 * static_cast<std::uint64_t>(p) + 1, band, 1.0, false);
    const double ratio = sobolev_norm(s, pointwise_product(f, g)) / (sobolev_norm(s, f) * sobolev_norm(s, g));
    best = std::max(best, ratio);
  }
  return best;
}

double contraction_constant(double product_constant, double nu) {
  return 4.0 * product_constant / std::sqrt(2.0 * std::numbers::e * nu);
}

}  // namespace ciflow
