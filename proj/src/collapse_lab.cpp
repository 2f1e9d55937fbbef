#include <vortexlab/collapse_lab.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vortexlab {

const char* to_string(RateLaw law) {
  switch (law) {
    case RateLaw::Linear: return "linear";
    case RateLaw::LinearLog: return "linear_log";
    case RateLaw::Power2s: return "power_2s";
  }
  return "unknown";
}

RateLaw rate_law_for(double s) {
  if (s > 0.5) return RateLaw::Linear;
  if (s == 0.5) return RateLaw::LinearLog;
  return RateLaw::Power2s;
}

double rate_value(RateLaw law, double s, double epsilon) {
  switch (law) {
    case RateLaw::Linear: return epsilon;
    case RateLaw::LinearLog: return epsilon * std::log(1.0 / epsilon);
    case RateLaw::Power2s: return std::pow(epsilon, 2.0 * s);
  }
  return 0.0;
}

double nominal_exponent(RateLaw law, double s) { return law == RateLaw::Power2s ? 2.0 * s : 1.0; }

void ScanConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(s > 0.0 && s <= 1.0)) fail("s", "must lie in (0, 1]");
  if (intensities.size() < 2) fail("intensities", "need at least two vortices");
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    if (intensities[i] == 0.0 || !std::isfinite(intensities[i])) {
      fail("intensities[" + std::to_string(i) + "]", "must be finite and nonzero");
    }
  }
  if (anchor < 0 || anchor >= static_cast<int>(intensities.size())) fail("anchor", "index out of range");
  if (!(rho > 0.0) || !std::isfinite(rho)) fail("rho", "must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon", "must be positive");
  if (epsilons.empty()) fail("epsilons", "must not be empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0 && epsilons[k] <= 0.5)) fail("epsilons[" + std::to_string(k) + "]", "must lie in (0, 1/2]");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) fail("epsilons", "must be strictly decreasing");
  }
  if (samples_per_epsilon < kMinSamples) {
    fail("samples_per_epsilon", "must be at least " + std::to_string(kMinSamples));
  }
  integrator.validate();
}

Rng stream_rng(std::uint64_t seed, std::uint64_t cell, std::uint64_t sample) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(cell), hi(cell), lo(sample), hi(sample)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RelativeSystem<double> sample_initial_relative(const ScanConfig& config, Rng& rng) {
  const int n = static_cast<int>(config.intensities.size());
  Pointsd y(2, n - 1);
  for (int c = 0; c < n - 1; ++c) {
    for (;;) {
      const double u = 2.0 * uniform01(rng) - 1.0;
      const double v = 2.0 * uniform01(rng) - 1.0;
      if (u * u + v * v <= 1.0) {
        y(0, c) = config.rho * u;
        y(1, c) = config.rho * v;
        break;
      }
    }
  }
  Vector<double> a = Eigen::Map<const Vector<double>>(config.intensities.data(), n);
  return RelativeSystem<double>(config.anchor, std::move(a), std::move(y));
}

const char* to_string(ProbeOutcome outcome) {
  switch (outcome) {
    case ProbeOutcome::Hit: return "hit";
    case ProbeOutcome::Miss: return "miss";
    case ProbeOutcome::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

ProbeResult eps_collapse_probe(const RelativeSystem<double>& rel, double s, double epsilon, double horizon,
                               const IntegratorConfig& integrator) {
  const RegularizedKernel<double> kernel = regularize(KernelProfile<double>::fractional(s), epsilon);
  IntegratorConfig config = integrator;
  config.collapse_threshold = epsilon;

  const int m = rel.size() - 1;
  const int anchor = rel.anchor();
  const Vector<double>& a = rel.intensities();
  const Summation summation = config.compensated_summation ? Summation::Compensated : Summation::Plain;

  OdeSystem ode;
  ode.rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    const Pointsd v = relative_velocity(Pointsd(Eigen::Map<const Pointsd>(y.data(), 2, m)), a, anchor, kernel, summation);
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

  double closest = std::numeric_limits<double>::infinity();
  auto observer = [&](double, const Eigen::VectorXd& y) { closest = std::min(closest, ode.event_distance(y).distance); };

  const OdeOutcome outcome = solve(ode, rel.state(), horizon, config, observer);
  ProbeResult result;
  result.min_distance = closest;
  switch (outcome.termination.cause) {
    case Termination::EpsCollapse:
      result.outcome = ProbeOutcome::Hit;
      result.first_time = outcome.termination.time;
      result.min_distance = outcome.termination.distance;
      break;
    case Termination::ReachedFinalTime:
      result.outcome = ProbeOutcome::Miss;
      break;
    case Termination::StepUnderflow:
      result.outcome = ProbeOutcome::Inconclusive;
      break;
  }
  return result;
}

Interval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lower, upper};
}

std::optional<LogLogFit> fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[k]) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  return LogLogFit{slope, my - slope * mx, static_cast<int>(n)};
}

CollapseScanResult scan(const ScanConfig& config, const ScanOptions& options) {
  config.validate();
  CollapseScanResult result;
  result.rate_law = rate_law_for(config.s);

  const int threads = std::max(1, options.threads);
  const std::size_t samples = static_cast<std::size_t>(config.samples_per_epsilon);

  for (std::size_t cell = 0; cell < config.epsilons.size(); ++cell) {
    const double eps = config.epsilons[cell];
    std::vector<ProbeResult> probes(samples);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < samples; i = next.fetch_add(1)) {
        Rng rng = stream_rng(config.rng_seed, cell, i);
        const RelativeSystem<double> rel = sample_initial_relative(config, rng);
        probes[i] = eps_collapse_probe(rel, config.s, eps, config.horizon, config.integrator);
      }
    };
    if (threads == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    }

    ScanCell out;
    out.epsilon = eps;
    out.sample_count = static_cast<long>(samples);
    for (const ProbeResult& p : probes) {
      if (p.outcome == ProbeOutcome::Hit) {
        ++out.hit_count;
        if (p.first_time && *p.first_time == 0.0) ++out.initial_hit_count;
      } else if (p.outcome == ProbeOutcome::Inconclusive) {
        ++out.inconclusive_count;
      }
    }
    out.measure_fraction = static_cast<double>(out.hit_count) / static_cast<double>(out.sample_count);
    out.wilson_ci_95 = wilson_interval(out.hit_count, out.sample_count);
    out.rate = rate_value(result.rate_law, config.s, eps);
    result.cells.push_back(out);
    if (options.progress) options.progress(cell, out);
  }

  std::vector<double> fit_eps, fit_frac;
  for (const ScanCell& c : result.cells) {
    result.upper_bound_constant = std::max(result.upper_bound_constant, c.measure_fraction / c.rate);
    if (c.hit_count >= CollapseScanResult::kMinFitHits) {
      fit_eps.push_back(c.epsilon);
      fit_frac.push_back(c.measure_fraction);
    } else {
      result.insufficient_hits.push_back(c.epsilon);
    }
  }
  if (auto fit = fit_loglog(fit_eps, fit_frac)) {
    result.fitted_exponent = fit->slope;
    result.fit_cells = fit->points;
  }
  return result;
}

PhiDiagnostics phi_psi(const RelativeSystem<double>& rel, double s, double epsilon, double a_param) {
  const AuxiliaryKernel<double> aux(a_param, epsilon);
  const RegularizedKernel<double> kernel = regularize(KernelProfile<double>::fractional(s), epsilon);
  const Pointsd& y = rel.differences();
  const int m = static_cast<int>(y.cols());

  PhiDiagnostics out;
  out.a_param = a_param;
  out.epsilon = epsilon;
  for (int c = 0; c < m; ++c) {
    const double r = y.col(c).norm();
    out.phi += aux.value(r);
    const double dl = std::abs(aux.radial_derivative(r));
    for (int e = 0; e < m; ++e) {
      if (e == c) continue;
      const double a_k = std::abs(rel.intensities()[rel.partner(e)]);
      const double g_anchor = std::abs(kernel.radial_derivative(y.col(e).norm()));
      const double g_split = std::abs(kernel.radial_derivative((y.col(c) - y.col(e)).norm()));
      out.psi += a_k * dl * (g_anchor + g_split);
    }
  }
  return out;
}

double phi_rate(const RelativeSystem<double>& rel, double s, double epsilon, double a_param) {
  const AuxiliaryKernel<double> aux(a_param, epsilon);
  const RegularizedKernel<double> kernel = regularize(KernelProfile<double>::fractional(s), epsilon);
  const Pointsd dy = relative_velocity(rel, kernel);
  double rate = 0.0;
  for (int c = 0; c < dy.cols(); ++c) {
    const Vec2d yc = rel.differences().col(c);
    const double r = yc.norm();
    if (r == 0.0) continue;
    rate += aux.radial_derivative(r) / r * yc.dot(dy.col(c));
  }
  return rate;
}

std::optional<VortexSystem<double>> find_collapse_candidate(const std::array<double, 3>& intensities, Rng& rng,
                                                            const CollapseSearchOptions& options) {
  const Vector<double> a = Eigen::Map<const Vector<double>>(intensities.data(), 3);
  for (double v : intensities) {
    if (v == 0.0 || !std::isfinite(v)) throw std::invalid_argument("find_collapse_candidate: invalid intensity");
  }
  const KernelProfile<double> euler = KernelProfile<double>::euler();
  const double total_abs = a.cwiseAbs().sum();

  auto build = [&](const Vec2d& third) {
    Pointsd x(2, 3);
    x.col(0) = Vec2d(-0.5, 0.0);
    x.col(1) = Vec2d(0.5, 0.0);
    x.col(2) = third;
    return VortexSystem<double>(a, std::move(x));
  };

  constexpr double kRayLength = 8.0;
  constexpr int kRayCells = 64;

  for (int attempt = 0; attempt < options.budget; ++attempt) {
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const Vec2d dir(std::cos(phi), std::sin(phi));
    const double rr = std::sqrt(uniform01(rng));
    const double phi_o = 2.0 * std::numbers::pi * uniform01(rng);
    const Vec2d origin = rr * Vec2d(std::cos(phi_o), std::sin(phi_o));

    auto constraint = [&](double lambda) { return collapse_constraint(build(origin + lambda * dir)).value; };

    // First sign change along the ray.
    double lo = 0.0, c_lo = constraint(lo);
    double hi = -1.0;
    for (int k = 1; k <= kRayCells; ++k) {
      const double lambda = kRayLength * double(k) / kRayCells;
      const double c = constraint(lambda);
      if ((c_lo > 0.0) != (c > 0.0)) {
        hi = lambda;
        break;
      }
      lo = lambda;
      c_lo = c;
    }
    if (hi < 0.0) continue;

    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const double c = constraint(mid);
      if ((c > 0.0) == (c_lo > 0.0)) {
        lo = mid;
        c_lo = c;
      } else {
        hi = mid;
      }
    }
    const double lambda = std::abs(constraint(lo)) <= std::abs(constraint(hi)) ? lo : hi;
    VortexSystem<double> candidate = build(origin + lambda * dir);
    if (std::abs(collapse_constraint(candidate).value) > options.constraint_tol) continue;
    if (closest_pair(candidate.positions()).distance < 1e-3) continue;

    // Shrink rates (d/dt |x_i - x_j|^2) / |x_i - x_j|^2 of the three sides.
    const Pointsd v = velocity(candidate, euler);
    std::array<double, 3> rates{};
    const std::array<std::array<int, 2>, 3> sides = {{{0, 1}, {0, 2}, {1, 2}}};
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sides.size(); ++k) {
      const auto [i, j] = sides[k];
      const Vec2d dx = candidate.position(i) - candidate.position(j);
      rates[k] = 2.0 * dx.dot(v.col(i) - v.col(j)) / dx.squaredNorm();
      d_min = std::min(d_min, dx.norm());
    }
    const double scale = total_abs / (2.0 * std::numbers::pi * d_min * d_min);
    const bool shrinking = std::all_of(rates.begin(), rates.end(), [&](double r) { return r < -1e-3 * scale; });
    const bool growing = std::all_of(rates.begin(), rates.end(), [&](double r) { return r > 1e-3 * scale; });
    if (!shrinking && !growing) continue;
    const double slowest = *std::min_element(rates.begin(), rates.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    });
    if (1.0 / std::abs(slowest) > options.max_collapse_time) continue;
    if (growing) candidate.positions().row(1) = (-candidate.positions().row(1)).array() + 0.0;
    return candidate;
  }
  return std::nullopt;
}

}  // namespace vortexlab
