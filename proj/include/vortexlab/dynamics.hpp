#pragma once

#include <vortexlab/integrator.hpp>
#include <vortexlab/invariants.hpp>
#include <vortexlab/velocity.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace vortexlab {

enum class StateKind { Absolute, Relative };

/// H, M, I, C at one snapshot. M and I are NaN for relative records, where
/// absolute positions are not tracked.
struct InvariantSample {
  double hamiltonian = 0.0;
  Vec2d vorticity_vector = Vec2d::Zero();
  double moment_of_inertia = 0.0;
  double collapse_constraint = 0.0;
};

struct TrajectoryRecord {
  StateKind kind = StateKind::Absolute;
  int anchor = -1;
  Vector<double> intensities;
  std::vector<double> times;
  /// Positions (absolute) or differences y_ij (relative), one per time.
  std::vector<Pointsd> states;
  /// Smallest separation over all pairs of vortices.
  std::vector<double> min_pair_distance;
  std::vector<InvariantSample> invariant_log;
  TerminationInfo termination;
  StepStats stats;

  std::size_t size() const { return times.size(); }
};

struct RecordOptions {
  /// Record exactly these times instead of every accepted step.
  std::vector<double> sample_times;
  bool log_invariants = true;
};

namespace detail {

inline Summation summation_of(const IntegratorConfig& config) {
  return config.compensated_summation ? Summation::Compensated : Summation::Plain;
}

}  // namespace detail

template <RadialKernel K>
InvariantSample invariant_sample(const VortexSystem<double>& system, const K& kernel) {
  return {hamiltonian(system, kernel), vorticity_vector(system), moment_of_inertia(system),
          collapse_constraint(system).value};
}

/// Integrates the point-vortex equation up to final_time, stopping early on
/// a first passage of the closest pair below config.collapse_threshold or on
/// step-size underflow.
template <RadialKernel K>
  requires std::same_as<typename K::Scalar, double>
TrajectoryRecord integrate(const VortexSystem<double>& system, const K& kernel, double final_time,
                           const IntegratorConfig& config, const RecordOptions& options = {}) {
  if (kernel.singular_at_zero()) system.require_separated();
  const int n = system.size();
  const Vector<double> a = system.intensities();
  const Summation summation = detail::summation_of(config);

  OdeSystem ode;
  ode.rhs = [&a, &kernel, n, summation](const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    Eigen::Map<const Pointsd> x(y.data(), 2, n);
    const Pointsd v = velocity(Pointsd(x), a, kernel, summation);
    f = Eigen::Map<const Eigen::VectorXd>(v.data(), 2 * n);
  };
  ode.event_distance = [n](const Eigen::VectorXd& y) {
    return closest_pair(Pointsd(Eigen::Map<const Pointsd>(y.data(), 2, n)));
  };

  TrajectoryRecord record;
  record.kind = StateKind::Absolute;
  record.intensities = a;
  auto observer = [&](double t, const Eigen::VectorXd& y) {
    Pointsd x = Eigen::Map<const Pointsd>(y.data(), 2, n);
    record.times.push_back(t);
    record.min_pair_distance.push_back(n > 1 ? closest_pair(x).distance : std::numeric_limits<double>::infinity());
    if (options.log_invariants) record.invariant_log.push_back(invariant_sample(VortexSystem<double>(a, x), kernel));
    record.states.push_back(std::move(x));
  };

  const OdeOutcome outcome = solve(ode, system.state(), final_time, config, observer, options.sample_times);
  record.termination = outcome.termination;
  record.stats = outcome.stats;
  return record;
}

/// Integrates the anchored relative dynamics. The collapse event watches
/// min_j |y_ij| over the anchor's partners only.
template <RadialKernel K>
  requires std::same_as<typename K::Scalar, double>
TrajectoryRecord integrate_relative(const RelativeSystem<double>& rel, const K& kernel, double final_time,
                                    const IntegratorConfig& config, const RecordOptions& options = {}) {
  if (kernel.singular_at_zero()) from_relative(rel).require_separated();
  const int m = rel.size() - 1;
  const int anchor = rel.anchor();
  const Vector<double> a = rel.intensities();
  const Summation summation = detail::summation_of(config);

  OdeSystem ode;
  ode.rhs = [&a, &kernel, m, anchor, summation](const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    const Pointsd d = Eigen::Map<const Pointsd>(y.data(), 2, m);
    const Pointsd v = relative_velocity(d, a, anchor, kernel, summation);
    f = Eigen::Map<const Eigen::VectorXd>(v.data(), 2 * m);
  };
  ode.event_distance = [m, anchor](const Eigen::VectorXd& y) {
    ClosestPair best;
    for (int c = 0; c < m; ++c) {
      const double d = std::hypot(y[2 * c], y[2 * c + 1]);
      if (d < best.distance) best = {d, anchor, c < anchor ? c : c + 1};
    }
    return best;
  };

  TrajectoryRecord record;
  record.kind = StateKind::Relative;
  record.anchor = anchor;
  record.intensities = a;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto observer = [&](double t, const Eigen::VectorXd& y) {
    const RelativeSystem<double> snap = rel.with_state(y);
    record.times.push_back(t);
    record.min_pair_distance.push_back(m > 0 ? closest_pair(snap).distance : std::numeric_limits<double>::infinity());
    if (options.log_invariants) {
      const VortexSystem<double> anchored = from_relative(snap);
      record.invariant_log.push_back(
          {hamiltonian(anchored, kernel), Vec2d(nan, nan), nan, collapse_constraint(anchored).value});
    }
    record.states.push_back(snap.differences());
  };

  const OdeOutcome outcome = solve(ode, rel.state(), final_time, config, observer, options.sample_times);
  record.termination = outcome.termination;
  record.stats = outcome.stats;
  return record;
}

/// Flow map X -> S^T X without recording, for Jacobian estimates.
template <RadialKernel K>
Pointsd flow(const VortexSystem<double>& system, const K& kernel, double final_time, const IntegratorConfig& config) {
  RecordOptions options;
  options.sample_times = {final_time};
  options.log_invariants = false;
  const TrajectoryRecord record = integrate(system, kernel, final_time, config, options);
  return record.states.back();
}

/// Central-difference Jacobian of the flow map on R^{2N}. Its determinant
/// measures phase-space volume change.
template <RadialKernel K>
Matrix<double> flow_map_jacobian(const VortexSystem<double>& system, const K& kernel, double final_time,
                                 const IntegratorConfig& config, double h) {
  const int dim = 2 * system.size();
  Matrix<double> jac(dim, dim);
  const Eigen::VectorXd x0 = system.state();
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp[k] += h;
    xm[k] -= h;
    const Pointsd fp = flow(system.with_state(xp), kernel, final_time, config);
    const Pointsd fm = flow(system.with_state(xm), kernel, final_time, config);
    jac.col(k) = (Eigen::Map<const Eigen::VectorXd>(fp.data(), dim) - Eigen::Map<const Eigen::VectorXd>(fm.data(), dim)) /
                 (2.0 * h);
  }
  return jac;
}

/// Per-invariant max over snapshots of |Q(t) - Q(0)| / max(|Q(0)|, 1).
/// Invariants that are NaN in the log (M, I of relative records) report NaN.
struct DriftReport {
  double hamiltonian = 0.0;
  double vorticity_vector = 0.0;
  double moment_of_inertia = 0.0;
  double collapse_constraint = 0.0;

  double max() const;
};

DriftReport drift_audit(const TrajectoryRecord& record);

}  // namespace vortexlab
