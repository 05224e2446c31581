#include "ciflow/drift_history.hpp"

#include <cmath>
#include <string>

namespace ciflow {

namespace {
constexpr double kNodeSnap = 1e-9;
}

DriftHistory::DriftHistory(double dt, std::vector<VectorField> fields, double prune_relative)
    : dt_(dt), fields_(std::move(fields)) {
  if (fields_.empty()) throw PreconditionError("drift history needs at least one field");
  if (fields_.size() > 1 && !(dt > 0.0)) throw PreconditionError("drift node spacing must be positive");
  for (const auto& f : fields_) require_same_grid(f, fields_.front(), "drift history");
  end_time_ = dt_ * static_cast<double>(fields_.size() - 1);
  evaluators_.reserve(fields_.size());
  for (const auto& f : fields_) evaluators_.emplace_back(f, prune_relative);
}

DriftHistory DriftHistory::frozen(const VectorField& field, double horizon) {
  if (!(horizon >= 0.0)) throw PreconditionError("frozen drift horizon must be >= 0");
  DriftHistory h;
  h.frozen_ = true;
  h.dt_ = horizon;
  h.end_time_ = horizon;
  h.fields_ = {field};
  h.evaluators_.emplace_back(field);
  return h;
}

DriftHistory DriftHistory::from_solution(const MildSolution& solution) {
  return DriftHistory(solution.dt(), solution.fields());
}

bool DriftHistory::is_zero() const {
  for (const auto& e : evaluators_)
    if (!e.is_zero()) return false;
  return true;
}

void DriftHistory::require_covers(double t) const {
  if (!(t >= 0.0) || t > end_time_ * (1.0 + kNodeSnap) + kNodeSnap)
    throw PreconditionError("drift history covers [0, " + std::to_string(end_time_) + "] but t = " +
                            std::to_string(t) + " was requested");
}

std::pair<std::size_t, double> DriftHistory::locate(double s) const {
  if (frozen_ || fields_.size() == 1) return {0, 0.0};
  const double r = s / dt_;
  const double last = static_cast<double>(fields_.size() - 1);
  if (r <= 0.0) return {0, 0.0};
  if (r >= last) return {fields_.size() - 1, 0.0};
  const double nearest = std::round(r);
  if (std::abs(r - nearest) < kNodeSnap) return {static_cast<std::size_t>(nearest), 0.0};
  const double base = std::floor(r);
  return {static_cast<std::size_t>(base), r - base};
}

void DriftHistory::evaluate(double s, const Vec& x, Vec& value, Mat& gradient) const {
  const auto [node, w] = locate(s);
  evaluators_[node].value_and_gradient(x, value, gradient);
  if (w == 0.0) return;
  Vec v1{};
  Mat g1{};
  evaluators_[node + 1].value_and_gradient(x, v1, g1);
  for (int j = 0; j < kMaxDim; ++j) value[j] = (1.0 - w) * value[j] + w * v1[j];
  for (int k = 0; k < kMaxDim * kMaxDim; ++k) gradient[k] = (1.0 - w) * gradient[k] + w * g1[k];
}

Vec DriftHistory::value(double s, const Vec& x) const {
  Vec v{};
  Mat g{};
  evaluate(s, x, v, g);
  return v;
}

}  // namespace ciflow
