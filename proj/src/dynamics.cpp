#include <vortexlab/dynamics.hpp>

#include <algorithm>
#include <cmath>

namespace vortexlab {

namespace {

double relative_change(double now, double start) { return std::abs(now - start) / std::max(std::abs(start), 1.0); }

double relative_change(const Vec2d& now, const Vec2d& start) {
  return (now - start).norm() / std::max(start.norm(), 1.0);
}

}  // namespace

double DriftReport::max() const {
  double m = 0.0;
  for (double d : {hamiltonian, vorticity_vector, moment_of_inertia, collapse_constraint}) {
    if (std::isfinite(d)) m = std::max(m, d);
  }
  return m;
}

DriftReport drift_audit(const TrajectoryRecord& record) {
  DriftReport report;
  const auto& log = record.invariant_log;
  if (log.empty()) return report;
  const InvariantSample& first = log.front();
  for (const InvariantSample& q : log) {
    report.hamiltonian = std::max(report.hamiltonian, relative_change(q.hamiltonian, first.hamiltonian));
    report.vorticity_vector = std::max(report.vorticity_vector, relative_change(q.vorticity_vector, first.vorticity_vector));
    report.moment_of_inertia =
        std::max(report.moment_of_inertia, relative_change(q.moment_of_inertia, first.moment_of_inertia));
    report.collapse_constraint =
        std::max(report.collapse_constraint, relative_change(q.collapse_constraint, first.collapse_constraint));
  }
  // std::max drops NaN comparisons; restore NaN where the invariant is untracked.
  if (!std::isfinite(first.moment_of_inertia)) report.moment_of_inertia = std::nan("");
  if (!first.vorticity_vector.allFinite()) report.vorticity_vector = std::nan("");
  return report;
}

}  // namespace vortexlab
