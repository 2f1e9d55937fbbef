#pragma once

// Monte Carlo estimates of the measure of epsilon-collapse initial data for
// the regularized relative dynamics, together with the auxiliary functionals
// used to bound it and a search for collapsing three-vortex configurations.

#include <vortexlab/dynamics.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vortexlab {

/// Decay law of the collapse-measure bound as a function of s.
enum class RateLaw {
  Linear,     // eps,             s > 1/2
  LinearLog,  // eps log(1/eps),  s = 1/2
  Power2s,    // eps^(2s),        s < 1/2
};

const char* to_string(RateLaw law);
RateLaw rate_law_for(double s);
double rate_value(RateLaw law, double s, double epsilon);
/// Exponent the log-log slope is compared against (1 or 2s).
double nominal_exponent(RateLaw law, double s);

struct ScanConfig {
  double s = 0.75;
  int anchor = 0;
  std::vector<double> intensities;
  double rho = 1.0;
  double horizon = 1.0;
  std::vector<double> epsilons;  // strictly decreasing, in (0, 1/2]
  int samples_per_epsilon = 1000;
  std::uint64_t rng_seed = 0;
  IntegratorConfig integrator;

  static constexpr int kMinSamples = 100;

  void validate() const;
};

/// Counter-based stream: the generator for (seed, cell, sample) does not
/// depend on how samples are distributed over workers.
using Rng = std::mt19937_64;
Rng stream_rng(std::uint64_t seed, std::uint64_t cell, std::uint64_t sample);
/// 53-bit uniform on [0, 1), identical across standard libraries.
double uniform01(Rng& rng);

/// Each y_ij uniform on the disk of radius rho (rejection from the square).
RelativeSystem<double> sample_initial_relative(const ScanConfig& config, Rng& rng);

enum class ProbeOutcome { Hit, Miss, Inconclusive };
const char* to_string(ProbeOutcome outcome);

struct ProbeResult {
  ProbeOutcome outcome = ProbeOutcome::Miss;
  std::optional<double> first_time;
  /// Closest anchor distance reached (at the hit for hits).
  double min_distance = 0.0;
};

/// Integrates the relative dynamics under the regularized kernel G_{s,eps}
/// and reports whether min_j |y_ij| drops to eps within the horizon. A step
/// underflow before that is Inconclusive, never a hit.
ProbeResult eps_collapse_probe(const RelativeSystem<double>& rel, double s, double epsilon, double horizon,
                               const IntegratorConfig& integrator);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 by default).
Interval wilson_interval(long successes, long trials, double z = 1.959963984540054);

struct ScanCell {
  double epsilon = 0.0;
  long hit_count = 0;
  long sample_count = 0;
  long inconclusive_count = 0;
  /// Hits already within epsilon at t = 0.
  long initial_hit_count = 0;
  double measure_fraction = 0.0;
  Interval wilson_ci_95;
  double rate = 0.0;  // rate_value(law, s, epsilon)
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least-squares line through (log x, log y).
std::optional<LogLogFit> fit_loglog(std::span<const double> x, std::span<const double> y);

struct CollapseScanResult {
  std::vector<ScanCell> cells;
  RateLaw rate_law = RateLaw::Linear;
  /// Slope of log measure_fraction against log eps over cells with at least
  /// kMinFitHits hits; absent when fewer than two cells qualify.
  std::optional<double> fitted_exponent;
  int fit_cells = 0;
  /// max over cells of measure_fraction / rate(eps): the smallest C with
  /// fraction <= C rate(eps) on every cell.
  double upper_bound_constant = 0.0;
  /// Cells excluded from the fit for having fewer than kMinFitHits hits.
  std::vector<double> insufficient_hits;

  static constexpr long kMinFitHits = 10;
};

struct ScanOptions {
  int threads = 1;
  /// Called on the calling thread after each cell completes.
  std::function<void(std::size_t, const ScanCell&)> progress;
};

CollapseScanResult scan(const ScanConfig& config, const ScanOptions& options = {});

struct PhiDiagnostics {
  double phi = 0.0;
  double psi = 0.0;
  double a_param = 1.0;
  double epsilon = 0.0;
};

/// Phi = sum_j L_{a,eps}(|y_ij|) and its rate bound
/// Psi = sum_j sum_{k != i,j} |a_k| |L'_{a,eps}(|y_ij|)| (|G'_{s,eps}(|y_ik|)| + |G'_{s,eps}(|y_ij - y_ik|)|).
PhiDiagnostics phi_psi(const RelativeSystem<double>& rel, double s, double epsilon, double a_param = 1.0);

/// Exact d/dt Phi along the regularized relative flow at the given state.
double phi_rate(const RelativeSystem<double>& rel, double s, double epsilon, double a_param = 1.0);

struct CollapseSearchOptions {
  int budget = 2000;
  double constraint_tol = 1e-10;
  /// Reject candidates whose self-similar collapse time -1/rate exceeds this.
  double max_collapse_time = 5.0;
};

/// Randomized search for a triangle with vanishing collapse constraint
/// C = sum_{i != j} a_i a_j |x_i - x_j|^2 whose sides all shrink under the
/// Euler flow. Vortices 0 and 1 sit at (-1/2, 0) and (1/2, 0); vortex 2 moves
/// along a random ray and C is driven to zero by bisection on the distance
/// along the ray. Expanding solutions are mirrored, which reverses time.
/// The squared sides shrink linearly when sum 1/a_i = 0, so the collapse time
/// is estimated as -1 / rate from the initial shrink rate.
std::optional<VortexSystem<double>> find_collapse_candidate(const std::array<double, 3>& intensities, Rng& rng,
                                                            const CollapseSearchOptions& options = {});

}  // namespace vortexlab
