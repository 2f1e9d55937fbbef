#include "doctest.h"

#include <vortexlab/kernels.hpp>

#include <array>
#include <cmath>
#include <numbers>

using namespace vortexlab;
using std::numbers::pi;

namespace {

// Stirling series for log Gamma at x + 20, brought back by the recurrence.
// Independent of std::tgamma; truncation error is below 1e-15.
double stirling_gamma(double x) {
  double product = 1.0;
  for (int k = 0; k < 20; ++k) product *= x + k;
  const double z = x + 20.0;
  const double z2 = z * z;
  const double series = 1.0 / (12 * z) - 1.0 / (360 * z * z2) + 1.0 / (1260 * z * z2 * z2) - 1.0 / (1680 * z * z2 * z2 * z2);
  const double log_gamma = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2 * pi) + series;
  return std::exp(log_gamma) / product;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("gamma oracle reproduces tabulated values") {
  CHECK(rel_err(stirling_gamma(0.25), 3.6256099082219083) < 1e-13);
  CHECK(rel_err(stirling_gamma(0.75), 1.2254167024651776) < 1e-13);
  CHECK(rel_err(stirling_gamma(0.5), std::sqrt(pi)) < 1e-13);
}

TEST_CASE("green values") {
  const auto euler = KernelProfile<double>::euler();
  CHECK(green_value(euler, 1.0) == 0.0);
  CHECK(rel_err(green_value(euler, 2.0), -std::log(2.0) / (2 * pi)) < 1e-15);

  const auto half = KernelProfile<double>::sqg(0.5);
  CHECK(rel_err(green_value(half, 1.0), 1.0 / (2 * pi)) < 1e-14);
  for (double r : {0.01, 1.0, 100.0}) CHECK(rel_err(green_value(half, r), 1.0 / (2 * pi * r)) < 1e-12);

  const auto sqg = KernelProfile<double>::sqg(0.75);
  const double oracle =
      stirling_gamma(0.25) / (std::pow(2.0, 1.5) * pi * stirling_gamma(0.75)) * std::pow(2.0, -0.5);
  CHECK(rel_err(oracle, 0.23544388511093724) < 1e-13);
  CHECK(rel_err(green_value(sqg, 2.0), 0.23544388511093724) < 1e-13);
}

TEST_CASE("fractional(1) is Euler and sqg needs s in (0, 1)") {
  CHECK(KernelProfile<double>::fractional(1.0).kind() == KernelKind::Euler);
  CHECK(KernelProfile<double>::fractional(0.3).kind() == KernelKind::Sqg);
  CHECK_THROWS_AS(KernelProfile<double>::sqg(0.0), std::domain_error);
  CHECK_THROWS_AS(KernelProfile<double>::sqg(1.0), std::domain_error);
  CHECK_THROWS_AS(green_value(KernelProfile<double>::euler(), 0.0), std::domain_error);
  CHECK_THROWS_AS(green_value(KernelProfile<double>::sqg(0.5), -1.0), std::domain_error);
}

TEST_CASE("radial derivative agrees with finite differences") {
  for (double s : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    const auto g = KernelProfile<double>::fractional(s);
    for (double r : {0.03, 0.4, 1.0, 7.0}) {
      const double h = 1e-6 * r;
      const double fd = (g.value(r + h) - g.value(r - h)) / (2 * h);
      CHECK(rel_err(g.radial_derivative(r), fd) < 1e-7);
    }
  }
}

TEST_CASE("perp gradient") {
  const auto euler = KernelProfile<double>::euler();
  Vec2d v = perp_gradient(euler, Vec2d(1.0, 0.0));
  CHECK(std::abs(v.x()) < 1e-17);
  CHECK(v.y() == doctest::Approx(-1.0 / (2 * pi)).epsilon(1e-15));
  v = perp_gradient(euler, Vec2d(0.0, 1.0));
  CHECK(v.x() == doctest::Approx(1.0 / (2 * pi)).epsilon(1e-15));
  CHECK(std::abs(v.y()) < 1e-17);

  const auto half = KernelProfile<double>::sqg(0.5);
  v = perp_gradient(half, Vec2d(2.0, 0.0));
  const double fd = (half.value(2.0 + 1e-6) - half.value(2.0 - 1e-6)) / 2e-6;
  CHECK(std::abs(v.x()) < 1e-17);
  CHECK(v.y() == doctest::Approx(-1.0 / (8 * pi)).epsilon(1e-14));
  CHECK(v.y() == doctest::Approx(fd).epsilon(1e-8));

  CHECK_THROWS_AS(perp_gradient(euler, Vec2d(0.0, 0.0)), SingularityError);
  const Vec2d zero = perp_gradient(regularize(euler, 0.1), Vec2d(0.0, 0.0));
  CHECK(zero.isZero(0.0));
}

TEST_CASE("regularized kernel values") {
  const auto half = KernelProfile<double>::sqg(0.5);
  const auto reg = regularize(half, 0.1);
  CHECK(rel_err(reg.value(0.2), 1.0 / (0.4 * pi)) < 1e-14);
  CHECK(rel_err(reg.value(0.0), 1.5 / (0.2 * pi)) < 1e-14);
  CHECK(reg.radial_derivative(0.0) == 0.0);
  CHECK_FALSE(reg.singular_at_zero());
  CHECK_THROWS_AS(regularize(KernelProfile<double>::euler(), 0.6), std::domain_error);
  CHECK_THROWS_AS(regularize(KernelProfile<double>::euler(), 0.0), std::domain_error);
  CHECK_NOTHROW(regularize(KernelProfile<double>::euler(), 0.5));
}

TEST_CASE("regularization conditions on dense grids") {
  for (double s : {0.1, 0.25, 0.5, 0.75}) {
    for (double eps : {0.5, 0.1, 0.01, 0.001}) {
      const auto report = check_regularization(regularize(KernelProfile<double>::sqg(s), eps));
      CAPTURE(s);
      CAPTURE(eps);
      CHECK(report.conditions_pass());
      CHECK(report.junction_residual() <= 1e-6);
      CHECK(report.max_fd_error_away < 1e-6);
    }
  }
  for (double eps : {0.1, 0.01, 0.001}) {
    const auto report = check_regularization(regularize(KernelProfile<double>::euler(), eps));
    CHECK(report.conditions_pass());
    CHECK(report.junction_residual() <= 1e-6);
  }
}

TEST_CASE("euler at eps = 1/2 outgrows twice G(eps) past q = 4") {
  // |log q| / 2pi > 2 log 2 / 2pi once q > 4, inside the [0, 10 eps] grid.
  const auto report = check_regularization(regularize(KernelProfile<double>::euler(), 0.5));
  CHECK(report.matches_base.pass);
  CHECK(report.bounded_by_base.pass);
  CHECK(report.slope_bounded.pass);
  CHECK_FALSE(report.bounded_by_twice.pass);
  CHECK(report.bounded_by_twice.worst_at > 4.0);
  const auto short_grid = check_regularization(regularize(KernelProfile<double>::euler(), 0.5), 2000, 8.0);
  CHECK(short_grid.bounded_by_twice.pass);
}

TEST_CASE("custom kernels are checked against their derivative") {
  auto value = [](double r) { return 1.0 / r; };
  auto good = [](double r) { return -1.0 / (r * r); };
  auto bad = [](double r) { return -2.0 / (r * r); };
  const auto k = KernelProfile<double>::custom(value, good, true, "inverse");
  CHECK(k.kind() == KernelKind::Custom);
  CHECK(k.value(4.0) == 0.25);
  CHECK_THROWS_AS(KernelProfile<double>::custom(value, bad, true, "broken"), std::invalid_argument);
  const auto report = check_regularization(regularize(k, 0.1));
  CHECK(report.conditions_pass());
}

TEST_CASE("auxiliary kernel") {
  const AuxiliaryKernel<double> l(1.0, 0.1);
  CHECK(rel_err(l.value(0.5), std::pow(0.5, -3.0)) < 1e-14);
  CHECK(rel_err(l.value(0.1), 1000.0) < 1e-14);
  CHECK(rel_err(l.value(0.0), 2000.0) < 1e-14);
  double worst = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double q = 0.1 * k / 1000.0;
    worst = std::max(worst, l.value(q));
    CHECK(l.radial_derivative(q) <= 0.0);
  }
  CHECK(worst <= 2000.0 * (1 + 1e-15));
  const double h = 1e-7;
  const double left = (l.value(0.1) - l.value(0.1 - h)) / h;
  const double right = (l.value(0.1 + h) - l.value(0.1)) / h;
  CHECK(rel_err(left, right) < 1e-4);
  CHECK(rel_err(l.radial_derivative(0.1), l.base_radial_derivative(0.1)) < 1e-12);
}

TEST_CASE("kernels are generic in the scalar type") {
  const auto g = KernelProfile<long double>::sqg(0.5L);
  CHECK(std::abs(g.value(1.0L) - 1.0L / (2.0L * std::numbers::pi_v<long double>)) < 1e-17L);
  const Vec2<long double> v = perp_gradient(KernelProfile<long double>::euler(), Vec2<long double>(1.0L, 0.0L));
  CHECK(std::abs(v.y() + 1.0L / (2.0L * std::numbers::pi_v<long double>)) < 1e-18L);
}
