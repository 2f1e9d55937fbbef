#include <vortexlab/integrator.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vortexlab {

void IntegratorConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("integrator." + field + ": " + why);
  };
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) fail("rel_tol", "must be positive");
  if (!(abs_tol > 0.0) || !std::isfinite(abs_tol)) fail("abs_tol", "must be positive");
  if (!(min_step > 0.0)) fail("min_step", "must be positive");
  if (!(max_step > min_step) || !std::isfinite(max_step)) fail("max_step", "must exceed min_step");
  if (!(collapse_threshold >= 0.0) || !std::isfinite(collapse_threshold)) {
    fail("collapse_threshold", "must be non-negative");
  }
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedFinalTime: return "ReachedFinalTime";
    case Termination::EpsCollapse: return "EpsCollapse";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "unknown";
}

namespace {

using Eigen::VectorXd;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 5.0;   // 1 / facmin
constexpr double kMaxGrowth = 0.1;   // 1 / facmax

constexpr std::array<double, 3> kInteriorChecks = {0.25, 0.5, 0.75};
constexpr double kEventDistanceTol = 1e-3;

class Stepper {
 public:
  Stepper(const OdeSystem& system, const IntegratorConfig& config, StepStats& stats, Eigen::Index n)
      : system_(system), config_(config), stats_(stats) {
    for (auto* v : {&k2_, &k3_, &k4_, &k5_, &k6_, &stage_}) v->resize(n);
  }

  void eval(const VectorXd& y, VectorXd& f) {
    ++stats_.rhs_evaluations;
    system_.rhs(y, f);
  }

  /// One Dormand-Prince step of size h from (y, f0). Returns false when the
  /// right-hand side is singular or non-finite along the way.
  bool step(const VectorXd& y, const VectorXd& f0, double h, VectorXd& y_new, VectorXd& f_new, double* error) {
    try {
      stage_ = y + h * a21 * f0;
      eval(stage_, k2_);
      stage_ = y + h * (a31 * f0 + a32 * k2_);
      eval(stage_, k3_);
      stage_ = y + h * (a41 * f0 + a42 * k2_ + a43 * k3_);
      eval(stage_, k4_);
      stage_ = y + h * (a51 * f0 + a52 * k2_ + a53 * k3_ + a54 * k4_);
      eval(stage_, k5_);
      stage_ = y + h * (a61 * f0 + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      eval(stage_, k6_);
      y_new = y + h * (a71 * f0 + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      eval(y_new, f_new);
    } catch (const SingularityError&) {
      return false;
    } catch (const std::domain_error&) {
      return false;
    }
    if (!y_new.allFinite() || !f_new.allFinite()) return false;
    if (error) {
      double sum = 0.0;
      const Eigen::Index n = y.size();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double est = h * (e1 * f0[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * f_new[i]);
        const double sk = config_.abs_tol + config_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        sum += (est / sk) * (est / sk);
      }
      *error = n > 0 ? std::sqrt(sum / double(n)) : 0.0;
      if (!std::isfinite(*error)) return false;
    }
    return true;
  }

 private:
  const OdeSystem& system_;
  const IntegratorConfig& config_;
  StepStats& stats_;
  VectorXd k2_, k3_, k4_, k5_, k6_, stage_;
};

double scaled_norm(const VectorXd& v, const VectorXd& y, const IntegratorConfig& config) {
  if (v.size() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sk = config.abs_tol + config.rel_tol * std::abs(y[i]);
    sum += (v[i] / sk) * (v[i] / sk);
  }
  return std::sqrt(sum / double(v.size()));
}

// Starting step from the local Lipschitz estimate (Hairer, Norsett & Wanner).
double initial_step(Stepper& stepper, const VectorXd& y, const VectorXd& f0, const IntegratorConfig& config) {
  const double d0 = scaled_norm(y, y, config);
  const double d1 = scaled_norm(f0, y, config);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, config.max_step);
  VectorXd y1 = y + h0 * f0;
  VectorXd f1(y.size());
  try {
    stepper.eval(y1, f1);
  } catch (const std::domain_error&) {
    return std::max(h0, config.min_step);
  }
  if (!f1.allFinite()) return std::max(h0, config.min_step);
  const double d2 = scaled_norm(f1 - f0, y, config) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::max(std::min({100.0 * h0, h1, config.max_step}), config.min_step);
}

VectorXd hermite(const VectorXd& y0, const VectorXd& f0, const VectorXd& y1, const VectorXd& f1, double h,
                 double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * f1;
}

}  // namespace

OdeOutcome solve(const OdeSystem& system, const Eigen::VectorXd& y0, double t_final, const IntegratorConfig& config,
                 const Observer& observer, std::span<const double> sample_times) {
  config.validate();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("final_time must be positive");
  if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
    throw std::invalid_argument("sample times must be sorted");
  }

  OdeOutcome out;
  Stepper stepper(system, config, out.stats, y0.size());
  const double threshold = config.collapse_threshold;
  const bool events = threshold > 0.0 && static_cast<bool>(system.event_distance);

  double t = 0.0;
  VectorXd y = y0;
  double last_observed = -1.0;
  auto observe = [&](double time, const VectorXd& state) {
    if (observer && time > last_observed) {
      observer(time, state);
      last_observed = time;
    }
  };
  auto finish = [&](Termination cause, double time, const VectorXd& state, ClosestPair pair) {
    observe(time, state);
    out.termination = {cause, time, pair.first, pair.second, pair.distance};
    out.final_state = state;
    out.final_time = time;
    return out;
  };

  observe(0.0, y);
  if (events) {
    const ClosestPair start = system.event_distance(y);
    if (start.distance <= threshold) return finish(Termination::EpsCollapse, 0.0, y, start);
  }

  VectorXd f0(y.size()), y_new(y.size()), f_new(y.size()), y_probe(y.size()), f_probe(y.size());
  stepper.eval(y, f0);  // singular initial data propagates to the caller
  double h = initial_step(stepper, y, f0, config);

  std::size_t next_sample = 0;
  while (next_sample < sample_times.size() && sample_times[next_sample] <= 0.0) ++next_sample;

  double err_old = 1e-4;
  bool last_rejected = false;
  const ClosestPair none{};

  while (t < t_final) {
    if (h < config.min_step) {
      // Name the closest pair, the usual culprit.
      return finish(Termination::StepUnderflow, t, y, system.event_distance ? system.event_distance(y) : none);
    }

    double target = t_final;
    if (next_sample < sample_times.size()) target = std::min(target, sample_times[next_sample]);
    double h_try = std::min(h, config.max_step);
    bool clipped = false;
    if (t + h_try >= target * (1.0 - 1e-14)) {
      h_try = target - t;
      clipped = true;
    }

    double err = 0.0;
    if (!stepper.step(y, f0, h_try, y_new, f_new, &err)) {
      ++out.stats.rejected;
      last_rejected = true;
      h = 0.25 * h_try;
      continue;
    }

    if (err > 1.0) {
      ++out.stats.rejected;
      last_rejected = true;
      h = h_try / std::min(kMaxShrink, std::pow(err, kExpo) / kSafety);
      continue;
    }

    const double t_new = clipped ? target : t + h_try;

    if (events) {
      // Screen the step with the cubic Hermite interpolant, then bracket the
      // first passage with exact Runge-Kutta sub-steps and bisect.
      std::array<double, 4> thetas = {kInteriorChecks[0], kInteriorChecks[1], kInteriorChecks[2], 1.0};
      bool suspect = system.event_distance(y_new).distance <= threshold;
      for (std::size_t c = 0; c < kInteriorChecks.size() && !suspect; ++c) {
        suspect = system.event_distance(hermite(y, f0, y_new, f_new, h_try, thetas[c])).distance <= threshold * 1.01;
      }
      if (suspect) {
        double lo = 0.0;
        for (double theta : thetas) {
          ClosestPair pair;
          if (theta == 1.0) {
            y_probe = y_new;
          } else if (!stepper.step(y, f0, theta * h_try, y_probe, f_probe, nullptr)) {
            continue;
          }
          pair = system.event_distance(y_probe);
          if (pair.distance > threshold) {
            lo = theta;
            continue;
          }
          double hi = theta;
          VectorXd y_hit = y_probe;
          ClosestPair hit = pair;
          for (int iter = 0; iter < 200; ++iter) {
            if (threshold - hit.distance <= kEventDistanceTol * threshold) break;
            if ((hi - lo) * h_try <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) break;
            const double mid = 0.5 * (lo + hi);
            if (!stepper.step(y, f0, mid * h_try, y_probe, f_probe, nullptr)) {
              hi = mid;
              continue;
            }
            const ClosestPair probe = system.event_distance(y_probe);
            if (probe.distance <= threshold) {
              hi = mid;
              y_hit = y_probe;
              hit = probe;
            } else {
              lo = mid;
            }
          }
          ++out.stats.accepted;
          const double t_hit = hi == 1.0 ? t_new : t + hi * h_try;
          return finish(Termination::EpsCollapse, t_hit, y_hit, hit);
        }
      }
    }

    ++out.stats.accepted;
    t = t_new;
    y.swap(y_new);
    f0.swap(f_new);

    if (sample_times.empty()) {
      observe(t, y);
    } else {
      while (next_sample < sample_times.size() && sample_times[next_sample] <= t) {
        if (sample_times[next_sample] == t) observe(t, y);
        ++next_sample;
      }
    }

    const double fac11 = std::pow(err, kExpo);
    double fac = fac11 / std::pow(err_old, kBeta);
    fac = std::clamp(fac / kSafety, kMaxGrowth, kMaxShrink);
    double h_next = h_try / fac;
    if (last_rejected) h_next = std::min(h_next, h_try);
    if (clipped) h_next = std::max(h_next, std::min(h, config.max_step));
    err_old = std::max(err, 1e-4);
    last_rejected = false;
    h = h_next;
  }

  return finish(Termination::ReachedFinalTime, t, y, none);
}

}  // namespace vortexlab
