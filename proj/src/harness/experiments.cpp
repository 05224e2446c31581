#include "ciflow/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include "ciflow/ci_solver.hpp"

namespace ciflow::harness {
namespace {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

SpectralGrid make_grid(const GridConfig& g) { return SpectralGrid(g.d, g.N, g.L); }

VectorField initial_field(const SpectralGrid& grid, const InitialConfig& c) {
  VectorField u0 = VectorField::zeros(grid);
  if (c.kind == "taylor_green") {
    u0 = taylor_green(grid, c.amplitude);
  } else if (c.kind == "random") {
    u0 = random_field(grid, c.seed, c.max_mode, c.decay, true, c.amplitude);
  }
  if (c.perturbation > 0.0) u0 = u0 + random_field(grid, c.seed + 1, c.max_mode, c.decay, true, c.perturbation);
  return u0;
}

SolverParams solver_params(const RunConfig& c, double dt) {
  SolverParams p;
  p.dt = dt;
  p.picard_tol = c.solver.picard_tol;
  p.max_picard = c.solver.max_picard;
  p.quadrature = c.solver.quadrature == "exponential_euler" ? DuhamelQuadrature::ExponentialEuler
                                                              : DuhamelQuadrature::ExponentialTrapezoidal;
  return p;
}

int steps_of(double t, double delta) {
  const double r = t / delta;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, k))
    throw ConfigError("time " + std::to_string(t) + " is not a multiple of " + std::to_string(delta), kSchemaViolation);
  return static_cast<int>(k);
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

double relative_divergence(const VectorField& v) { return relative(divergence_norm(v), l2_norm_of(v)); }

SummaryRow row(const RunConfig& c, int N, int M, double delta, double t, int n) {
  SummaryRow r;
  r.experiment = c.experiment;
  r.N = N;
  r.M = M;
  r.delta = delta;
  r.t = t;
  r.n = n;
  return r;
}

Check slope_check(const RunConfig& c, const std::string& name, double slope) {
  const double target = c.threshold("slope_target");
  const double tol = c.threshold("slope_tol");
  Check k = check_le(name, std::abs(slope - target), tol,
                     "fitted slope " + std::to_string(slope) + ", target " + std::to_string(target));
  return k;
}

void require_counts(const std::vector<int>& counts, int M) {
  if (counts.empty() || counts.back() > M)
    throw ConfigError("mc.sample_counts must be ascending and end at or below mc.M", kSchemaViolation);
}

// -- taylor_green ------------------------------------------------------------

ExperimentResult taylor_green_experiment(const RunConfig& c, Execution) {
  ExperimentResult out;
  const Stopwatch clock;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, T = c.physics.T, dt = c.physics.dt;
  steps_of(T, dt);
  const double amp = c.initial.amplitude;
  const VectorField u0 = taylor_green(grid, amp);
  const MildSolution sol = solve_mild(u0, T, nu, s, solver_params(c, dt));
  const double rate = 2.0 * nu * grid.wavenumber_scale() * grid.wavenumber_scale();

  double worst_l2 = 0.0, worst_div = 0.0, energy_rise = 0.0;
  int max_picard = 0;
  for (std::size_t j = 0; j < sol.node_count(); ++j) {
    const VectorField exact = std::exp(-rate * sol.time(j)) * u0;
    worst_l2 = std::max(worst_l2, relative(l2_norm_of(sol.at(j) - exact), l2_norm_of(exact)));
    worst_div = std::max(worst_div, relative_divergence(sol.at(j)));
    if (j > 0) {
      energy_rise = std::max(energy_rise, sol.records()[j].l2_norm - sol.records()[j - 1].l2_norm);
      max_picard = std::max(max_picard, sol.records()[j].picard_iterations);
    }
  }
  const VectorField exact_T = std::exp(-rate * T) * u0;
  const VectorField& final = sol.at(sol.node_count() - 1);
  SummaryRow r = row(c, grid.n(), 0, dt, T, 0);
  r.err_l2_rel = relative(l2_norm_of(final - exact_T), l2_norm_of(exact_T));
  r.err_hs_rel = relative(sobolev_norm(s, final - exact_T), sobolev_norm(s, exact_T));
  r.wall_seconds = clock.seconds();
  out.rows.push_back(r);
  out.checks.push_back(check_le("tg_l2_error_at_T", r.err_l2_rel, c.threshold("err_l2_rel_max")));
  out.checks.push_back(check_le("tg_l2_error_all_nodes", worst_l2, c.threshold("err_l2_rel_max")));
  out.checks.push_back(check_le("divergence_free_all_nodes", worst_div, c.threshold("divergence_max")));
  out.checks.push_back(check_le("energy_nonincreasing", energy_rise, c.threshold("energy_slack")));

  // Self-convergence under dt halving. Taylor-Green alone is reproduced to
  // round-off, so a divergence-free perturbation makes the nonlinear term act.
  const int halvings = c.solver.order_halvings;
  if (halvings >= 2) {
    InitialConfig pert = c.initial;
    pert.kind = "taylor_green";
    pert.perturbation = c.solver.order_perturbation;
    const VectorField v0 = initial_field(grid, pert);
    std::vector<VectorField> finals;
    std::vector<double> dts;
    for (int k = 0; k <= halvings; ++k) {
      const double h = dt / std::pow(2.0, k);
      const MildSolution level = solve_mild(v0, T, nu, s, solver_params(c, h));
      finals.push_back(level.at(level.node_count() - 1));
      dts.push_back(h);
    }
    std::vector<double> diffs, orders;
    json levels = json::array();
    for (int k = 0; k < halvings; ++k) {
      const VectorField d = finals[k] - finals[k + 1];
      diffs.push_back(l2_norm_of(d));
      SummaryRow lr = row(c, grid.n(), 0, dts[k], T, 0);
      lr.experiment = c.experiment + "/self_convergence";
      lr.err_l2_rel = relative(diffs.back(), l2_norm_of(finals[k + 1]));
      lr.err_hs_rel = relative(sobolev_norm(s, d), sobolev_norm(s, finals[k + 1]));
      out.rows.push_back(lr);
      levels.push_back({{"dt", dts[k]}, {"difference_l2", diffs.back()}});
    }
    for (std::size_t k = 0; k + 1 < diffs.size(); ++k) orders.push_back(std::log2(diffs[k] / diffs[k + 1]));
    const double order = *std::min_element(orders.begin(), orders.end());
    out.checks.push_back(check_ge("self_convergence_order", order, c.threshold("order_min"),
                                  "min over consecutive dt halvings of log2 ratio of successive differences"));
    out.details["self_convergence"] = {{"levels", levels}, {"orders", orders}};
  }
  out.details["max_picard_iterations"] = max_picard;
  out.details["max_hs_norm"] = sol.max_hs_norm();
  out.fields.push_back({"u_T", final, {{"t", T}}});
  out.fields.push_back({"u_exact_T", exact_T, {{"t", T}}});
  return out;
}

// -- feynman_kac ---------------------------------------------------------------

ExperimentResult feynman_kac_experiment(const RunConfig& c, Execution policy) {
  ExperimentResult out;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, t = c.physics.T, delta = c.mc.delta;
  const int steps = steps_of(t, delta);
  const VectorField u0 = initial_field(grid, c.initial);
  const VectorField exact = heat_semigroup(t, nu, u0);
  const DriftHistory drift = DriftHistory::frozen(VectorField::zeros(grid), t);
  const auto counts = c.counts();
  require_counts(counts, c.mc.M);
  const int check_samples = static_cast<int>(c.threshold("check_samples"));
  const auto check_at = std::find(counts.begin(), counts.end(), check_samples);
  if (check_at == counts.end())
    throw ConfigError("thresholds.check_samples must be one of mc.sample_counts", kSchemaViolation);

  const std::size_t K = counts.size();
  std::vector<double> sq_err(K, 0.0), sq_hs(K, 0.0), se_sum(K, 0.0), seconds(K, 0.0);
  json replicates = json::array();
  for (int r = 0; r < c.mc.replicates; ++r) {
    const Stopwatch clock;
    const auto noise = BrownianEnsemble::generate(c.mc.M, steps, delta, grid.dim(), c.mc.seed + r);
    const auto estimates = ci_velocity_nested(drift, u0, t, nu, noise, counts, policy);
    json rep = json::array();
    for (std::size_t k = 0; k < K; ++k) {
      const auto report = make_report(estimates[k], exact, t, delta, s);
      sq_err[k] += report.err_l2_rel * report.err_l2_rel;
      sq_hs[k] += report.err_hs_rel * report.err_hs_rel;
      se_sum[k] += report.mc_se_rel;
      rep.push_back({{"M", counts[k]}, {"err_l2_rel", report.err_l2_rel}, {"mc_se_rel", report.mc_se_rel}});
      if (r == 0 && counts[k] == check_samples) {
        out.checks.push_back(check_le("fk_error_within_se_multiple", report.err_l2_rel,
                                      c.threshold("se_multiple") * report.mc_se_rel,
                                      "threshold = se_multiple x aggregate MC standard error at M=" +
                                          std::to_string(check_samples)));
        out.fields.push_back({"u_mc", estimates[k].velocity, {{"t", t}, {"M", counts[k]}}});
      }
    }
    seconds[K - 1] += clock.seconds();
    replicates.push_back(rep);
  }
  out.fields.push_back({"u_heat", exact, {{"t", t}}});

  const double R = c.mc.replicates;
  std::vector<double> ms, rms;
  for (std::size_t k = 0; k < K; ++k) {
    SummaryRow r = row(c, grid.n(), counts[k], delta, t, 0);
    r.err_l2_rel = std::sqrt(sq_err[k] / R);
    r.err_hs_rel = std::sqrt(sq_hs[k] / R);
    r.mc_se = se_sum[k] / R;
    r.wall_seconds = seconds[k] / R;
    out.rows.push_back(r);
    ms.push_back(counts[k]);
    rms.push_back(r.err_l2_rel);
  }
  if (K >= 2) {
    const double slope = loglog_slope(ms, rms);
    out.checks.push_back(slope_check(c, "fk_mc_rate_slope", slope));
    out.details["rate_slope"] = slope;
  }
  out.details["replicates"] = replicates;
  return out;
}

// -- representation -------------------------------------------------------------

ExperimentResult representation_experiment(const RunConfig& c, Execution policy) {
  ExperimentResult out;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, t = c.physics.T;
  const VectorField u0 = initial_field(grid, c.initial);
  const Stopwatch solve_clock;
  const MildSolution sol = solve_mild(u0, t, nu, s, solver_params(c, c.physics.dt));
  const double solve_seconds = solve_clock.seconds();
  const auto counts = c.counts();
  require_counts(counts, c.mc.M);
  const int steps = steps_of(t, c.mc.delta);

  const Stopwatch mc_clock;
  const auto noise = BrownianEnsemble::generate(c.mc.M, steps, c.mc.delta, grid.dim(), c.mc.seed);
  const auto reports = representation_check_nested(sol, u0, t, noise, counts, policy);
  const double mc_seconds = mc_clock.seconds();
  json per_count = json::array();
  for (const auto& rep : reports) {
    SummaryRow r = row(c, grid.n(), rep.samples, rep.delta, t, 0);
    r.err_l2_rel = rep.err_l2_rel;
    r.err_hs_rel = rep.err_hs_rel;
    r.mc_se = rep.mc_se_rel;
    r.wall_seconds = solve_seconds + mc_seconds * rep.samples / counts.back();
    out.rows.push_back(r);
    per_count.push_back({{"M", rep.samples},
                         {"err_l2_rel", rep.err_l2_rel},
                         {"err_hs_rel", rep.err_hs_rel},
                         {"mc_se_rel", rep.mc_se_rel},
                         {"divergence_rel", relative_divergence(rep.mc)}});
  }
  const auto& last = reports.back();
  const double bound = std::max(c.threshold("err_floor"), c.threshold("se_multiple") * last.mc_se_rel);
  out.checks.push_back(check_le("representation_error", last.err_l2_rel, bound,
                                "threshold = max(err_floor, se_multiple x MC SE) at M=" +
                                    std::to_string(last.samples)));
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < reports.size(); ++k)
    worst_ratio = std::max(worst_ratio, reports[k + 1].err_l2_rel / reports[k].err_l2_rel);
  if (reports.size() >= 2)
    out.checks.push_back(check_lt("error_strictly_decreasing_in_M", worst_ratio, 1.0,
                                  "largest ratio of consecutive errors along the sample counts"));
  double worst_div = 0.0;
  for (const auto& rep : reports) worst_div = std::max(worst_div, relative_divergence(rep.mc));
  out.checks.push_back(check_le("mc_estimate_divergence_free", worst_div, c.threshold("divergence_max")));
  out.details["per_count"] = per_count;
  out.fields.push_back({"u_mc", last.mc, {{"t", t}, {"M", last.samples}}});
  out.fields.push_back({"u_mild", last.reference, {{"t", t}}});

  if (c.rate.enabled) {
    // Sampling rate on a cheaper grid: RMS error over independent replicates.
    GridConfig rg = c.grid;
    rg.N = c.rate.N;
    const auto rgrid = make_grid(rg);
    const VectorField ru0 = initial_field(rgrid, c.initial);
    const MildSolution rsol = solve_mild(ru0, t, nu, s, solver_params(c, c.physics.dt));
    const int rsteps = steps_of(t, c.rate.delta);
    const auto& rc = c.rate.sample_counts;
    require_counts(rc, rc.empty() ? 0 : rc.back());
    std::vector<double> sq(rc.size(), 0.0), se(rc.size(), 0.0);
    for (int r = 0; r < c.rate.replicates; ++r) {
      const auto rnoise =
          BrownianEnsemble::generate(rc.back(), rsteps, c.rate.delta, rgrid.dim(), c.mc.seed + 1 + r);
      const auto rr = representation_check_nested(rsol, ru0, t, rnoise, rc, policy);
      for (std::size_t k = 0; k < rc.size(); ++k) {
        sq[k] += rr[k].err_l2_rel * rr[k].err_l2_rel;
        se[k] += rr[k].mc_se_rel;
      }
    }
    std::vector<double> ms, rms;
    for (std::size_t k = 0; k < rc.size(); ++k) {
      SummaryRow r = row(c, rgrid.n(), rc[k], c.rate.delta, t, 0);
      r.experiment = c.experiment + "/rate";
      r.err_l2_rel = std::sqrt(sq[k] / c.rate.replicates);
      r.mc_se = se[k] / c.rate.replicates;
      out.rows.push_back(r);
      ms.push_back(rc[k]);
      rms.push_back(r.err_l2_rel);
    }
    const double slope = loglog_slope(ms, rms);
    out.checks.push_back(slope_check(c, "representation_mc_rate_slope", slope));
    out.details["rate_slope"] = slope;
  }
  return out;
}

// -- mollify_converge -----------------------------------------------------------

ExperimentResult mollify_converge_experiment(const RunConfig& c, Execution policy) {
  ExperimentResult out;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, T = c.physics.T;
  const VectorField u0 = initial_field(grid, c.initial);
  const auto params = solver_params(c, c.physics.dt);
  const MildSolution sol = solve_mild(u0, T, nu, s, params);
  const auto noise =
      BrownianEnsemble::generate(c.mc.M, steps_of(T, c.mc.delta), c.mc.delta, grid.dim(), c.mc.seed);

  const double product = fit_product_constant(grid, s, c.mollify.fit_pairs, c.initial.seed + 17);
  const double m_fit = contraction_constant(product, nu);
  const double t_star = local_existence_time(u0, s, nu, m_fit);
  out.checks.push_back(check_le("T_within_contraction_window", T, t_star, "threshold = local existence time T*"));

  const double u_norm = l2_norm_of(sol.at(sol.node_count() - 1));
  Table table{"decomposition",
              {"n", "gap_hs", "gap_l2", "stability_ratio", "i1", "i2", "i3", "total", "i1_bound", "jacobian_moment"},
              {}};
  std::vector<double> gaps, ratios, sums;
  bool bound_ok = true;
  double worst_bound_ratio = 0.0;
  for (int n : c.mollify.levels) {
    const Stopwatch clock;
    const VectorField u0n = mollify(n, u0);
    const MildSolution sol_n = solve_mild(u0n, T, nu, s, params);
    const double gap_hs = sobolev_norm(s, u0n - u0);
    const double gap_l2 = l2_norm_of(u0n - u0);
    const double ratio = stability_ratio(sol, sol_n, u0, u0n, s);
    const auto d = error_decomposition(sol_n, sol, u0n, u0, T, noise, policy);
    gaps.push_back(gap_hs);
    ratios.push_back(ratio);
    sums.push_back(d.i1 + d.i2 + d.i3);
    const double bound = d.i1_bound();
    bound_ok = bound_ok && d.i1 <= bound;
    worst_bound_ratio = std::max(worst_bound_ratio, relative(d.i1, bound));
    table.rows.push_back({double(n), gap_hs, gap_l2, ratio, d.i1, d.i2, d.i3, d.total, bound, d.jacobian_moment});

    SummaryRow r = row(c, grid.n(), c.mc.M, c.mc.delta, T, n);
    const VectorField diff = sol_n.at(sol_n.node_count() - 1) - sol.at(sol.node_count() - 1);
    r.err_l2_rel = relative(d.total, u_norm);
    r.err_hs_rel = relative(sobolev_norm(s, diff), sobolev_norm(s, sol.at(sol.node_count() - 1)));
    r.wall_seconds = clock.seconds();
    out.rows.push_back(r);
  }
  out.tables.push_back(table);

  double worst_gap_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k) worst_gap_ratio = std::max(worst_gap_ratio, gaps[k + 1] / gaps[k]);
  if (gaps.size() >= 2)
    out.checks.push_back(check_lt("data_gap_hs_strictly_decreasing", worst_gap_ratio, 1.0,
                                  "largest ratio of consecutive ||u0^n - u0||_{H^s}"));
  out.checks.push_back(check_le("stability_ratio_bounded", *std::max_element(ratios.begin(), ratios.end()),
                                c.threshold("stability_ratio_max"), "max over n of the Lipschitz quotient"));
  out.checks.push_back(check_le("i1_within_moment_bound", worst_bound_ratio, 1.0,
                                "max over n of I1 / (sqrt(sup_x E|grad Y^n|^2) ||u0^n - u0||_{L2})"));
  double worst_sum_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < sums.size(); ++k)
    worst_sum_ratio = std::max(worst_sum_ratio, relative(sums[k + 1], sums[k]));
  if (sums.size() >= 2)
    out.checks.push_back(check_le("split_sum_decreasing_in_n", worst_sum_ratio, 1.0 + c.threshold("mc_slack"),
                                  "largest ratio of consecutive I1+I2+I3"));
  out.details["product_constant"] = product;
  out.details["contraction_constant"] = m_fit;
  out.details["local_existence_time"] = t_star;
  out.details["stability_ratios"] = ratios;
  out.details["i1_bound_holds"] = bound_ok;
  out.fields.push_back({"u0", u0, {{"t", 0.0}}});
  out.fields.push_back({"u_T", sol.at(sol.node_count() - 1), {{"t", T}}});
  return out;
}

// -- flow_stability ---------------------------------------------------------------

ExperimentResult flow_stability_experiment(const RunConfig& c, Execution policy) {
  ExperimentResult out;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, T = c.physics.T;
  const VectorField u0 = initial_field(grid, c.initial);
  const MildSolution sol = solve_mild(u0, T, nu, s, solver_params(c, c.physics.dt));
  const DriftHistory limit = DriftHistory::from_solution(sol);
  std::vector<DriftHistory> sequence;
  for (int n : c.mollify.levels) {
    std::vector<VectorField> nodes;
    for (const auto& f : sol.fields()) nodes.push_back(mollify(n, f));
    sequence.emplace_back(sol.dt(), std::move(nodes));
  }
  const auto points = grid_points(grid);
  const auto noise =
      BrownianEnsemble::generate(c.mc.M, steps_of(T, c.mc.delta), c.mc.delta, grid.dim(), c.mc.seed);
  const Stopwatch clock;
  const auto metrics = flow_stability_metrics(sequence, limit, T, nu, points, noise, c.flow.p, policy);
  const double seconds = clock.seconds();
  const int half = std::max(1, c.mc.M / 2);
  const auto half_metrics =
      flow_stability_metrics(sequence, limit, T, nu, points, noise.leading(half), c.flow.p, policy);

  const double slack = c.threshold("mc_slack");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < metrics.position_gap.size(); ++k)
    worst = std::max(worst, relative(metrics.position_gap[k + 1], metrics.position_gap[k]));
  if (metrics.position_gap.size() >= 2)
    out.checks.push_back(check_le("position_gap_nonincreasing_in_n", worst, 1.0 + slack,
                                  "largest ratio of consecutive E sup|Y^n - Y|^p"));
  const double moment_change = std::abs(metrics.jacobian_moment_sup - half_metrics.jacobian_moment_sup);
  out.checks.push_back(check_le("jacobian_moment_stable_under_doubling_M", moment_change,
                                c.threshold("se_multiple") * half_metrics.jacobian_moment_sup_se,
                                "threshold = se_multiple x standard error at M/2"));

  const auto flow = simulate_backward_flow(limit, T, nu, points, noise, policy);
  out.checks.push_back(check_ge("backward_jacobian_determinant_positive", flow.min_jacobian_determinant(), 0.0));
  if (c.flow.dump) out.flow_dump = flow;

  double fd = 0.0;
  const int fd_points = std::min<int>(c.flow.fd_points, static_cast<int>(points.size()));
  for (int q = 0; q < fd_points; ++q) {
    const std::size_t idx = points.size() * static_cast<std::size_t>(q) / static_cast<std::size_t>(fd_points);
    fd = std::max(fd, jacobian_fd_check(limit, T, nu, points[idx], noise, c.flow.fd_step));
  }
  out.checks.push_back(check_le("jacobian_fd_discrepancy", fd, c.threshold("fd_max")));

  for (std::size_t k = 0; k < c.mollify.levels.size(); ++k) {
    SummaryRow r = row(c, grid.n(), c.mc.M, c.mc.delta, T, c.mollify.levels[k]);
    r.err_l2_rel = metrics.position_gap[k];
    r.err_hs_rel = metrics.jacobian_gap[k];
    r.mc_se = metrics.jacobian_moment_se[k];
    r.wall_seconds = seconds / static_cast<double>(c.mollify.levels.size());
    out.rows.push_back(r);
  }
  Table table{"flow_metrics", {"n", "position_gap", "jacobian_gap", "jacobian_moment", "jacobian_moment_se"}, {}};
  for (std::size_t k = 0; k < c.mollify.levels.size(); ++k)
    table.rows.push_back({double(c.mollify.levels[k]), metrics.position_gap[k], metrics.jacobian_gap[k],
                          metrics.jacobian_moment[k], metrics.jacobian_moment_se[k]});
  out.tables.push_back(table);
  out.details["jacobian_moment_sup"] = metrics.jacobian_moment_sup;
  out.details["jacobian_moment_sup_half"] = half_metrics.jacobian_moment_sup;
  out.details["min_jacobian_determinant"] = flow.min_jacobian_determinant();
  out.details["fd_discrepancy"] = fd;
  return out;
}

// -- self_consistent -----------------------------------------------------------------

ExperimentResult self_consistent_experiment(const RunConfig& c, Execution policy) {
  ExperimentResult out;
  const auto grid = make_grid(c.grid);
  const SobolevIndex s{c.physics.s};
  const double nu = c.physics.nu, T = c.physics.T, delta = c.mc.delta;
  const int steps = steps_of(T, delta);
  const VectorField u0 = initial_field(grid, c.initial);
  const auto noise = BrownianEnsemble::generate(c.mc.M, steps, delta, grid.dim(), c.mc.seed);
  const Stopwatch clock;
  const auto result =
      self_consistent_solve(u0, T, nu, s, noise, c.self_consistent.outer_tol, c.self_consistent.max_outer, policy);
  const double seconds = clock.seconds();
  const MildSolution ref = solve_mild(u0, T, nu, s, solver_params(c, delta));

  double worst_excess = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const auto& mc = result.fields[static_cast<std::size_t>(j)];
    const auto& exact = ref.at(static_cast<std::size_t>(j));
    SummaryRow r = row(c, grid.n(), c.mc.M, delta, j * delta, 0);
    r.err_l2_rel = relative(l2_norm_of(mc - exact), l2_norm_of(exact));
    r.err_hs_rel = relative(sobolev_norm(s, mc - exact), sobolev_norm(s, exact));
    r.mc_se = relative(result.node_std_error[static_cast<std::size_t>(j)], l2_norm_of(exact));
    r.wall_seconds = seconds / steps;
    out.rows.push_back(r);
    const double bound = std::max(c.threshold("err_floor"), c.threshold("se_multiple") * r.mc_se);
    worst_excess = std::max(worst_excess, r.err_l2_rel / bound);
  }
  out.checks.push_back(check_le("matches_mild_solver_all_nodes", worst_excess, 1.0,
                                "max over nodes of err / max(err_floor, se_multiple x MC SE)"));
  // Until the change reaches the noise floor, each outer iteration must shrink it.
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < result.deltas.size(); ++k)
    if (result.deltas[k] > result.noise_floors[k])
      worst_ratio = std::max(worst_ratio, result.deltas[k + 1] / result.deltas[k]);
  out.checks.push_back(check_lt("outer_deltas_contract", worst_ratio, 1.0,
                                "largest ratio of consecutive outer deltas above the noise floor"));
  Table table{"outer_iterations", {"k", "delta_l2", "noise_floor"}, {}};
  for (std::size_t k = 0; k < result.deltas.size(); ++k)
    table.rows.push_back({double(k + 1), result.deltas[k], result.noise_floors[k]});
  out.tables.push_back(table);
  out.details["iterations"] = result.iterations;
  out.details["deltas"] = result.deltas;
  out.details["noise_floors"] = result.noise_floors;
  out.fields.push_back({"u_T", result.fields.back(), {{"t", T}}});
  out.fields.push_back({"u_mild_T", ref.at(ref.node_count() - 1), {{"t", T}}});
  return out;
}

using Runner = std::function<ExperimentResult(const RunConfig&, Execution)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"taylor_green", taylor_green_experiment},
      {"feynman_kac", feynman_kac_experiment},
      {"representation", representation_experiment},
      {"mollify_converge", mollify_converge_experiment},
      {"flow_stability", flow_stability_experiment},
      {"self_consistent", self_consistent_experiment},
  };
  return table;
}

Check make_check(std::string name, double value, std::string relation, double threshold, bool passed,
                 std::string note) {
  return {std::move(name), value, std::move(relation), threshold, passed, std::move(note)};
}

}  // namespace

Check check_le(std::string name, double value, double threshold, std::string note) {
  return make_check(std::move(name), value, "<=", threshold, value <= threshold, std::move(note));
}

Check check_ge(std::string name, double value, double threshold, std::string note) {
  return make_check(std::move(name), value, ">=", threshold, value >= threshold, std::move(note));
}

Check check_lt(std::string name, double value, double threshold, std::string note) {
  return make_check(std::move(name), value, "<", threshold, value < threshold, std::move(note));
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {"taylor_green", "mild solver against the exact decaying Taylor-Green vortex, plus dt self-convergence"},
      {"feynman_kac", "zero-drift stochastic representation against the heat semigroup, MC rate"},
      {"representation", "stochastic representation driven by the mild solution against the mild solution"},
      {"mollify_converge", "mollified data chain: data gaps, stability quotients, I1/I2/I3 split"},
      {"flow_stability", "common-noise stability of backward flows under mollified drifts"},
      {"self_consistent", "Picard iteration on the drift of the coupled stochastic system"},
  };
  return catalog;
}

ExperimentResult run_experiment(const RunConfig& config, Execution policy) {
  const auto it = runners().find(config.experiment);
  if (it == runners().end()) throw ConfigError("unknown experiment " + config.experiment, kSchemaViolation);
  ExperimentResult result = it->second(config, policy);
  result.experiment = config.experiment;
  return result;
}

}  // namespace ciflow::harness
