#include "doctest.h"

#include <vortexlab/dynamics.hpp>

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>

using namespace vortexlab;
using std::numbers::pi;

namespace {

VortexSystem<double> pair(double a1, double a2, Vec2d x1, Vec2d x2) {
  Pointsd x(2, 2);
  x << x1.x(), x2.x(), x1.y(), x2.y();
  return VortexSystem<double>(Vector<double>{{a1, a2}}, x);
}

VortexSystem<double> random_system(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-1.0, 1.0), mag(0.3, 1.5);
  std::bernoulli_distribution sign(0.5);
  for (;;) {
    Vector<double> a(n);
    Pointsd x(2, n);
    for (int i = 0; i < n; ++i) {
      a[i] = sign(rng) ? mag(rng) : -mag(rng);
      x.col(i) = Vec2d(pos(rng), pos(rng));
    }
    if (closest_pair(x).distance > 0.3) return VortexSystem<double>(a, x);
  }
}

}  // namespace

TEST_CASE("two-vortex velocities") {
  const auto euler = KernelProfile<double>::euler();
  Pointsd v = velocity(pair(2 * pi, 2 * pi, {0.5, 0}, {-0.5, 0}), euler);
  CHECK(v.col(0).isApprox(Vec2d(0, -1), 1e-15));
  CHECK(v.col(1).isApprox(Vec2d(0, 1), 1e-15));

  v = velocity(pair(2 * pi, -2 * pi, {0.5, 0}, {-0.5, 0}), euler);
  CHECK(v.col(0).isApprox(Vec2d(0, 1), 1e-15));
  CHECK(v.col(1).isApprox(Vec2d(0, 1), 1e-15));

  const VortexSystem<double> single(Vector<double>{{3.0}}, Pointsd::Constant(2, 1, 0.7));
  CHECK(velocity(single, euler).isZero(0.0));
}

TEST_CASE("velocity rejects coincident vortices under singular kernels") {
  const auto sys = pair(1, 1, {0.2, 0.3}, {0.2, 0.3});
  CHECK_THROWS_AS(velocity(sys, KernelProfile<double>::euler()), SingularityError);
  try {
    sys.require_separated();
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.first() == 0);
    CHECK(e.second() == 1);
  }
  CHECK(velocity(sys, regularize(KernelProfile<double>::euler(), 0.1)).isZero(0.0));
}

TEST_CASE("relative velocity") {
  const auto euler = KernelProfile<double>::euler();
  Pointsd y(2, 1);
  y << 1.0, 0.0;
  RelativeSystem<double> rel(0, Vector<double>{{1.0, -1.0}}, y);
  CHECK(relative_velocity(rel, euler).isZero(0.0));

  rel = RelativeSystem<double>(0, Vector<double>{{1.0, 1.0}}, y);
  const Pointsd dy = relative_velocity(rel, euler);
  CHECK(std::abs(dy(0, 0)) < 1e-17);
  CHECK(dy(1, 0) == doctest::Approx(-1.0 / pi).epsilon(1e-15));
  const Pointsd v = velocity(pair(1, 1, {1, 0}, {0, 0}), euler);
  CHECK((v.col(0) - v.col(1)).isApprox(dy.col(0), 1e-15));
}

TEST_CASE("relative velocity matches differences of absolute velocities") {
  std::mt19937_64 rng(11);
  for (double s : {0.5, 0.75, 1.0}) {
    const auto kernel = KernelProfile<double>::fractional(s);
    for (int trial = 0; trial < 20; ++trial) {
      const auto sys = random_system(rng, 4);
      const int anchor = trial % 4;
      const Pointsd v = velocity(sys, kernel);
      const RelativeSystem<double> rel = to_relative(sys, anchor);
      const Pointsd dy = relative_velocity(rel, kernel);
      const double scale = v.cwiseAbs().maxCoeff();
      for (int c = 0; c < 3; ++c) {
        const int j = rel.partner(c);
        CHECK((dy.col(c) - (v.col(anchor) - v.col(j))).norm() <= 1e-14 * std::max(scale, 1.0));
      }
    }
  }
}

TEST_CASE("compensated summation agrees with plain summation") {
  std::mt19937_64 rng(5);
  const auto sys = random_system(rng, 5);
  const auto kernel = KernelProfile<double>::sqg(0.75);
  const Pointsd a = velocity(sys, kernel, Summation::Plain);
  const Pointsd b = velocity(sys, kernel, Summation::Compensated);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phase-space divergence vanishes") {
  std::mt19937_64 rng(3);
  const auto euler = KernelProfile<double>::euler();
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = random_system(rng, 3);
    CHECK(std::abs(phase_space_divergence(sys, euler, 1e-5)) <= 1e-6 * velocity_gradient_scale(sys, euler));
  }
  const VortexSystem<double> single(Vector<double>{{1.0}}, Pointsd::Zero(2, 1));
  CHECK(phase_space_divergence(single, euler, 1e-5) == 0.0);

  const auto reg = regularize(KernelProfile<double>::sqg(0.5), 0.1);
  const auto close = pair(1.0, 0.7, {0.0, 0.0}, {0.05, 0.02});
  CHECK(std::abs(phase_space_divergence(close, reg, 1e-5)) <= 1e-6 * std::max(velocity_gradient_scale(close, reg), 1.0));
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.rel_tol = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.min_step = 1.0;
  c.max_step = 0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("translating pair follows the closed-form solution") {
  const auto euler = KernelProfile<double>::euler();
  const auto sys = pair(2 * pi, -2 * pi, {0.5, 0}, {-0.5, 0});
  const TrajectoryRecord rec = integrate(sys, euler, 5.0, IntegratorConfig{});
  CHECK(rec.termination.cause == Termination::ReachedFinalTime);
  CHECK(rec.times.back() == 5.0);
  const Pointsd& x = rec.states.back();
  CHECK((x.col(0) - Vec2d(0.5, 5.0)).norm() < 1e-8);
  CHECK((x.col(1) - Vec2d(-0.5, 5.0)).norm() < 1e-8);
  CHECK(std::abs((x.col(0) - x.col(1)).norm() - 1.0) < 1e-8);
  CHECK(drift_audit(rec).max() <= 1e-8);

  const TrajectoryRecord relrec = integrate_relative(to_relative(sys, 0), euler, 5.0, IntegratorConfig{});
  CHECK((relrec.states.back().col(0) - Vec2d(1.0, 0.0)).norm() < 1e-10);
}

TEST_CASE("co-rotating pair follows the circular orbit") {
  const auto euler = KernelProfile<double>::euler();
  const auto sys = pair(2 * pi, 2 * pi, {0.5, 0}, {-0.5, 0});
  RecordOptions options;
  options.sample_times = {pi / 8, pi / 4};
  const TrajectoryRecord rec = integrate(sys, euler, pi / 4, IntegratorConfig{}, options);
  REQUIRE(rec.size() == 3);
  CHECK(rec.times[1] == pi / 8);
  // Angular velocity (a1 + a2) / (2 pi d^2) = 2, clockwise.
  const Pointsd& x = rec.states.back();
  CHECK((x.col(0) - Vec2d(0.0, -0.5)).norm() < 1e-6);
  CHECK((x.col(1) - Vec2d(0.0, 0.5)).norm() < 1e-6);
}

TEST_CASE("single vortex is stationary") {
  const VortexSystem<double> single(Vector<double>{{2.0}}, Pointsd::Constant(2, 1, 0.25));
  const TrajectoryRecord rec = integrate(single, KernelProfile<double>::euler(), 3.0, IntegratorConfig{});
  const DriftReport drift = drift_audit(rec);
  CHECK(drift.hamiltonian == 0.0);
  CHECK(drift.vorticity_vector == 0.0);
  CHECK(drift.moment_of_inertia == 0.0);
  CHECK(drift.collapse_constraint == 0.0);
  CHECK(rec.states.back().isApprox(single.positions(), 0.0));
}

TEST_CASE("collapse threshold stops at the first passage") {
  // A translating pair passes on either side of a weak vortex at the origin.
  Pointsd x(2, 3);
  x << -0.1, 0.1, 0.0, -2.0, -2.0, 0.0;
  const VortexSystem<double> sys(Vector<double>{{-1.0, 1.0, 0.01}}, x);
  IntegratorConfig config;
  config.collapse_threshold = 0.15;
  const TrajectoryRecord rec = integrate(sys, KernelProfile<double>::euler(), 50.0, config);
  REQUIRE(rec.termination.cause == Termination::EpsCollapse);
  CHECK(std::abs(rec.termination.distance - 0.15) <= 1e-3 * 0.15);
  CHECK(rec.termination.time > 0.0);
  CHECK(rec.termination.second == 2);
  CHECK(std::abs(rec.min_pair_distance.back() - 0.15) <= 1e-3 * 0.15);
}

TEST_CASE("integration is time reversible") {
  std::mt19937_64 rng(17);
  const auto kernel = KernelProfile<double>::sqg(0.75);
  const auto sys = random_system(rng, 4);
  const IntegratorConfig config;
  const Pointsd forward = flow(sys, kernel, 2.0, config);
  const VortexSystem<double> reversed(-sys.intensities(), forward);
  const Pointsd back = flow(reversed, kernel, 2.0, config);
  CHECK((back - sys.positions()).cwiseAbs().maxCoeff() < 100 * (config.rel_tol + config.abs_tol));
}

TEST_CASE("far spectator barely perturbs a close pair") {
  const auto euler = KernelProfile<double>::euler();
  const auto isolated = integrate_relative(to_relative(pair(1.0, 1.0, {0.5, 0}, {-0.5, 0}), 0), euler, 2.0,
                                           IntegratorConfig{});
  double previous = std::numeric_limits<double>::infinity();
  for (double distance : {10.0, 100.0, 1000.0}) {
    Pointsd x(2, 3);
    x << 0.5, -0.5, 0.0, 0.0, 0.0, distance;
    const auto rec = integrate_relative(to_relative(VortexSystem<double>(Vector<double>{{1.0, 1.0, 1.0}}, x), 0),
                                        euler, 2.0, IntegratorConfig{});
    const double err = (rec.states.back().col(0) - isolated.states.back().col(0)).norm();
    CHECK(err <= 10.0 / distance);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("flow map of a small system preserves volume") {
  const auto euler = KernelProfile<double>::euler();
  Pointsd x(2, 3);
  x << 0.0, 1.0, -0.3, 0.0, 0.2, 0.9;
  const VortexSystem<double> sys(Vector<double>{{1.0, -0.7, 0.5}}, x);
  const Matrix<double> jac = flow_map_jacobian(sys, euler, 1.0, IntegratorConfig{}, 1e-5);
  CHECK(std::abs(jac.determinant() - 1.0) < 1e-4);
}

TEST_CASE("sample times outside the horizon are rejected") {
  const auto sys = pair(1, 1, {0.5, 0}, {-0.5, 0});
  RecordOptions options;
  options.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(integrate(sys, KernelProfile<double>::euler(), 1.0, IntegratorConfig{}, options),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(sys, KernelProfile<double>::euler(), 0.0, IntegratorConfig{}), std::invalid_argument);
}

TEST_CASE("relative records carry H and C only") {
  const auto sys = pair(1.0, 0.5, {0.5, 0}, {-0.5, 0});
  const auto rec = integrate_relative(to_relative(sys, 1), KernelProfile<double>::euler(), 1.0, IntegratorConfig{});
  CHECK(rec.kind == StateKind::Relative);
  CHECK(rec.anchor == 1);
  const DriftReport drift = drift_audit(rec);
  CHECK(std::isnan(drift.vorticity_vector));
  CHECK(std::isnan(drift.moment_of_inertia));
  CHECK(drift.hamiltonian < 1e-9);
  CHECK(drift.collapse_constraint < 1e-9);
  CHECK(std::isfinite(drift.max()));
}
