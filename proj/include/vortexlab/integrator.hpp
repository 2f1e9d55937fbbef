#pragma once

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with PI step control
// and first-passage detection of a distance threshold.

#include <vortexlab/system.hpp>

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>

namespace vortexlab {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double min_step = 1e-12;
  /// First passage of the event distance below this value stops the run;
  /// 0 disables the event.
  double collapse_threshold = 0.0;
  bool compensated_summation = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Termination { ReachedFinalTime, EpsCollapse, StepUnderflow };

const char* to_string(Termination t);

struct TerminationInfo {
  Termination cause = Termination::ReachedFinalTime;
  double time = 0.0;
  /// Colliding pair for EpsCollapse, otherwise -1.
  int first = -1;
  int second = -1;
  /// Event distance at the reported state.
  double distance = 0.0;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Autonomous ODE y' = f(y) plus the distance whose first passage below the
/// collapse threshold terminates integration.
struct OdeSystem {
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> rhs;
  std::function<ClosestPair(const Eigen::VectorXd&)> event_distance;
};

struct OdeOutcome {
  TerminationInfo termination;
  Eigen::VectorXd final_state;
  double final_time = 0.0;
  StepStats stats;
};

using Observer = std::function<void(double, const Eigen::VectorXd&)>;

/// Integrates from t = 0 to t_final.
///
/// The observer sees t = 0, then every accepted step (or, when sample_times
/// is non-empty, exactly those times; steps are shortened to land on them),
/// then the terminal state. Right-hand sides that throw SingularityError or
/// produce non-finite values cause the step to be rejected and shrunk; once
/// the controller asks for a step below min_step the run ends with
/// StepUnderflow.
OdeOutcome solve(const OdeSystem& system, const Eigen::VectorXd& y0, double t_final, const IntegratorConfig& config,
                 const Observer& observer = {}, std::span<const double> sample_times = {});

}  // namespace vortexlab
