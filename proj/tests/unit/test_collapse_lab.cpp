#include "doctest.h"

#include <vortexlab/collapse_lab.hpp>

#include <cmath>
#include <numbers>

using namespace vortexlab;

namespace {

ScanConfig small_config() {
  ScanConfig c;
  c.s = 0.75;
  c.intensities = {1.0, 1.0, -0.5};
  c.epsilons = {0.2, 0.1};
  c.samples_per_epsilon = 100;
  c.rng_seed = 99;
  c.integrator.rel_tol = 1e-8;
  c.integrator.abs_tol = 1e-10;
  return c;
}

RelativeSystem<double> rel_from(std::vector<double> a, std::vector<Vec2d> y) {
  Pointsd d(2, static_cast<int>(y.size()));
  for (std::size_t k = 0; k < y.size(); ++k) d.col(static_cast<int>(k)) = y[k];
  return RelativeSystem<double>(0, Eigen::Map<Vector<double>>(a.data(), static_cast<int>(a.size())), d);
}

}  // namespace

TEST_CASE("rate laws") {
  CHECK(rate_law_for(0.75) == RateLaw::Linear);
  CHECK(rate_law_for(1.0) == RateLaw::Linear);
  CHECK(rate_law_for(0.5) == RateLaw::LinearLog);
  CHECK(rate_law_for(0.25) == RateLaw::Power2s);
  CHECK(rate_value(RateLaw::Linear, 0.75, 0.1) == 0.1);
  CHECK(rate_value(RateLaw::LinearLog, 0.5, 0.1) == doctest::Approx(0.1 * std::log(10.0)));
  CHECK(rate_value(RateLaw::Power2s, 0.25, 0.01) == doctest::Approx(0.1));
  CHECK(nominal_exponent(RateLaw::Power2s, 0.25) == 0.5);
  CHECK(nominal_exponent(RateLaw::Linear, 0.75) == 1.0);
  CHECK(std::string(to_string(RateLaw::LinearLog)) == "linear_log");
}

TEST_CASE("uniform disk sampling") {
  ScanConfig c = small_config();
  c.intensities = {1.0, 1.0};
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    Rng rng = stream_rng(1, 0, static_cast<std::uint64_t>(k));
    const auto rel = sample_initial_relative(c, rng);
    const double r2 = rel.differences().col(0).squaredNorm();
    CHECK_MESSAGE(r2 <= 1.0, "sample outside the disk");
    sum += r2;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);

  Rng a = stream_rng(5, 2, 3), b = stream_rng(5, 2, 3), other = stream_rng(5, 3, 2);
  const auto ra = sample_initial_relative(small_config(), a);
  const auto rb = sample_initial_relative(small_config(), b);
  const auto rc = sample_initial_relative(small_config(), other);
  CHECK(ra.differences() == rb.differences());
  CHECK(ra.differences() != rc.differences());
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng = stream_rng(0, 0, 0);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("probe outcomes") {
  IntegratorConfig integrator;
  integrator.rel_tol = 1e-10;
  const auto pair = rel_from({1.0, 1.0}, {{1.0, 0.0}});
  ProbeResult r = eps_collapse_probe(pair, 1.0, 0.1, 5.0, integrator);
  CHECK(r.outcome == ProbeOutcome::Miss);
  CHECK_FALSE(r.first_time.has_value());
  CHECK(r.min_distance == doctest::Approx(1.0).epsilon(1e-8));

  const auto overlap = rel_from({1.0, -0.5, 1.0}, {{0.05, 0.0}, {0.6, 0.3}});
  r = eps_collapse_probe(overlap, 0.75, 0.1, 1.0, integrator);
  CHECK(r.outcome == ProbeOutcome::Hit);
  REQUIRE(r.first_time.has_value());
  CHECK(*r.first_time == 0.0);

  Rng rng = stream_rng(1, 0, 0);
  CollapseSearchOptions options;
  options.max_collapse_time = 5.0;
  const auto candidate = find_collapse_candidate({1.0, 1.0, -0.5}, rng, options);
  REQUIRE(candidate.has_value());
  // Anchor on a vortex of the pair that closes first under the exact flow.
  // Once that pair is within eps the regularized flow stops collapsing, so
  // the third vortex may never come within eps of the others.
  const auto exact = integrate(*candidate, KernelProfile<double>::euler(), 10.0, integrator);
  REQUIRE(exact.termination.cause == Termination::StepUnderflow);
  r = eps_collapse_probe(to_relative(*candidate, exact.termination.first), 1.0, 1e-3, 10.0, integrator);
  CHECK(r.outcome == ProbeOutcome::Hit);
  REQUIRE(r.first_time.has_value());
  CHECK(*r.first_time > 0.0);
}

TEST_CASE("wilson interval") {
  // Closed form evaluated independently.
  auto oracle = [](double k, double n, double z) {
    const double p = k / n, z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    return std::pair{centre - half, centre + half};
  };
  for (auto [k, n] : {std::pair{0L, 100L}, {5L, 100L}, {50L, 100L}, {100L, 100L}, {37L, 10000L}}) {
    const Interval ci = wilson_interval(k, n);
    const auto [lo, hi] = oracle(double(k), double(n), 1.959963984540054);
    CHECK(ci.lower == doctest::Approx(std::max(lo, 0.0)).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(std::min(hi, 1.0)).epsilon(1e-12));
    CHECK(ci.lower <= double(k) / n);
    CHECK(ci.upper >= double(k) / n);
  }
  CHECK(wilson_interval(0, 100).lower == 0.0);
}

TEST_CASE("log-log fit") {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double e : x) y.push_back(3.0 * std::pow(e, 1.5));
  const auto fit = fit_loglog(x, y);
  REQUIRE(fit.has_value());
  CHECK(fit->slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::exp(fit->intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit->points == 4);
  CHECK_FALSE(fit_loglog(std::vector<double>{0.1}, std::vector<double>{0.2}).has_value());
}

TEST_CASE("scan configuration is validated") {
  ScanConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.samples_per_epsilon = 50;
  CHECK_THROWS_WITH_AS(c.validate(), "samples_per_epsilon: must be at least 100", std::invalid_argument);
  c = small_config();
  c.epsilons = {0.1, 0.2};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.epsilons = {0.6};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.anchor = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("scan is deterministic across thread counts") {
  const ScanConfig c = small_config();
  ScanOptions one, four;
  four.threads = 4;
  std::vector<std::size_t> seen;
  four.progress = [&](std::size_t idx, const ScanCell&) { seen.push_back(idx); };
  const CollapseScanResult a = scan(c, one);
  const CollapseScanResult b = scan(c, four);
  CHECK(seen.size() == c.epsilons.size());
  REQUIRE(a.cells.size() == 2);
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    CHECK(a.cells[k].hit_count == b.cells[k].hit_count);
    CHECK(a.cells[k].initial_hit_count == b.cells[k].initial_hit_count);
    CHECK(a.cells[k].measure_fraction == b.cells[k].measure_fraction);
    CHECK(a.cells[k].sample_count == 100);
    CHECK(a.cells[k].measure_fraction >= a.cells[k].wilson_ci_95.lower);
    CHECK(a.cells[k].measure_fraction <= a.cells[k].wilson_ci_95.upper);
    CHECK(a.cells[k].measure_fraction >= 0.0);
    CHECK(a.cells[k].measure_fraction <= 1.0);
    CHECK(a.cells[k].initial_hit_count <= a.cells[k].hit_count);
  }
  CHECK(a.cells[0].hit_count >= a.cells[1].hit_count);
  CHECK(a.rate_law == RateLaw::Linear);
  CHECK(a.upper_bound_constant == b.upper_bound_constant);
  CHECK(a.upper_bound_constant > 0.0);
}

TEST_CASE("phi and psi diagnostics") {
  const auto rel = rel_from({1.0, -0.5, 0.8}, {{0.5, 0.0}, {0.0, 0.7}});
  const PhiDiagnostics d = phi_psi(rel, 0.75, 0.1, 1.0);
  CHECK(d.phi == doctest::Approx(std::pow(0.5, -3.0) + std::pow(0.7, -3.0)).epsilon(1e-14));
  CHECK(d.psi > 0.0);

  const PhiDiagnostics two = phi_psi(rel_from({1.0, 1.0}, {{0.3, 0.2}}), 0.5, 0.1);
  CHECK(two.psi == 0.0);
  CHECK(two.phi > 0.0);
}

TEST_CASE("phi rate is dominated by psi along regularized trajectories") {
  Rng rng = stream_rng(4, 0, 0);
  ScanConfig c = small_config();
  c.intensities = {1.0, -0.6, 0.7, 0.9};
  for (int trial = 0; trial < 20; ++trial) {
    const auto rel = sample_initial_relative(c, rng);
    for (double s : {0.5, 0.75, 1.0}) {
      const double eps = 0.05;
      const auto kernel = regularize(KernelProfile<double>::fractional(s), eps);
      const PhiDiagnostics d = phi_psi(rel, s, eps);
      CHECK(std::abs(phi_rate(rel, s, eps)) <= d.psi * (1 + 1e-12));

      // Finite difference of Phi in time along the flow.
      RecordOptions options;
      options.sample_times = {1e-6, 2e-6};
      options.log_invariants = false;
      IntegratorConfig integrator;
      integrator.rel_tol = 1e-13;
      integrator.abs_tol = 1e-15;
      const auto rec = integrate_relative(rel, kernel, 2e-6, integrator, options);
      auto at = [&](int k) {
        return rel.with_state(Eigen::Map<const Eigen::VectorXd>(rec.states[k].data(), rec.states[k].size()));
      };
      const double fd = (phi_psi(at(2), s, eps).phi - phi_psi(at(0), s, eps).phi) / 2e-6;
      const double rate = phi_rate(at(1), s, eps);
      CHECK(fd == doctest::Approx(rate).epsilon(1e-6).scale(1.0));
      CHECK(std::abs(rate) <= phi_psi(at(1), s, eps).psi * (1 + 1e-12));
    }
  }
}

TEST_CASE("collapse candidate search") {
  Rng rng = stream_rng(1, 0, 0);
  const auto found = find_collapse_candidate({1.0, 1.0, -0.5}, rng);
  REQUIRE(found.has_value());
  CHECK(std::abs(collapse_constraint(*found).value) <= 1e-10);
  // The C = 0 locus for these intensities is the circle of radius sqrt(3)/2.
  CHECK(found->position(2).norm() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));

  Rng rng2 = stream_rng(1, 0, 0);
  CollapseSearchOptions quick;
  quick.budget = 50;
  CHECK_FALSE(find_collapse_candidate({1.0, 1.0, 1.0}, rng2, quick).has_value());
}
