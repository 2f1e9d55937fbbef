#pragma once

// Radial interaction kernels G(r) for the point-vortex model.
//
// Every kernel type exposes the same surface:
//   value(r), radial_derivative(r), singular_at_zero()
// and free functions (green_value, perp_gradient) work on any of them.

#include <vortexlab/types.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vortexlab {

enum class KernelKind { Euler, Sqg, Custom };

inline const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Euler: return "euler";
    case KernelKind::Sqg: return "sqg";
    case KernelKind::Custom: return "custom";
  }
  return "unknown";
}

template <typename K>
concept RadialKernel = requires(const K& k, typename K::Scalar r) {
  { k.value(r) } -> std::convertible_to<typename K::Scalar>;
  { k.radial_derivative(r) } -> std::convertible_to<typename K::Scalar>;
  { k.singular_at_zero() } -> std::convertible_to<bool>;
};

/// Green-function profile of (-Laplacian)^s on the plane.
///
/// Euler (s = 1):  G(r) = log(1/r) / (2 pi)
/// SQG (0<s<1):    G(r) = Gamma(1-s) / (4^s pi Gamma(s)) * r^(-2(1-s))
/// Custom:         user-supplied value/derivative closures, checked for
///                 mutual consistency by finite differences on construction.
template <typename Scalar_>
class KernelProfile {
 public:
  using Scalar = Scalar_;
  using Function = std::function<Scalar(Scalar)>;

  static KernelProfile euler() {
    KernelProfile k;
    k.kind_ = KernelKind::Euler;
    k.s_ = Scalar(1);
    k.coefficient_ = Scalar(1) / (Scalar(2) * std::numbers::pi_v<Scalar>);
    return k;
  }

  static KernelProfile sqg(Scalar s) {
    if (!(s > Scalar(0) && s < Scalar(1))) {
      throw std::domain_error("sqg kernel requires 0 < s < 1");
    }
    KernelProfile k;
    k.kind_ = KernelKind::Sqg;
    k.s_ = s;
    k.coefficient_ = std::tgamma(Scalar(1) - s) /
                     (std::pow(Scalar(2), Scalar(2) * s) * std::numbers::pi_v<Scalar> * std::tgamma(s));
    k.exponent_ = Scalar(2) * (Scalar(1) - s);
    return k;
  }

  /// s = 1 is the Euler kernel, s in (0,1) the SQG family.
  static KernelProfile fractional(Scalar s) {
    if (s == Scalar(1)) return euler();
    return sqg(s);
  }

  /// Throws std::invalid_argument when the derivative closure disagrees
  /// with central differences of the value closure (relative error above
  /// 1e-6 on a log grid over [1e-3, 1e3]).
  static KernelProfile custom(Function value, Function radial_derivative, bool singular_at_zero,
                              std::string name = "custom") {
    if (!value || !radial_derivative) {
      throw std::invalid_argument("custom kernel requires value and derivative closures");
    }
    KernelProfile k;
    k.kind_ = KernelKind::Custom;
    k.value_fn_ = std::move(value);
    k.derivative_fn_ = std::move(radial_derivative);
    k.singular_ = singular_at_zero;
    k.name_ = std::move(name);
    k.check_custom_consistency();
    return k;
  }

  KernelKind kind() const { return kind_; }
  /// Fractional order; 1 for Euler, NaN for custom kernels.
  Scalar s() const { return kind_ == KernelKind::Custom ? std::numeric_limits<Scalar>::quiet_NaN() : s_; }
  Scalar coefficient() const { return coefficient_; }
  bool singular_at_zero() const { return kind_ == KernelKind::Custom ? singular_ : true; }
  const std::string& name() const { return name_; }

  Scalar value(Scalar r) const {
    require_positive(r);
    switch (kind_) {
      case KernelKind::Euler: return -coefficient_ * std::log(r);
      case KernelKind::Sqg: return coefficient_ * std::pow(r, -exponent_);
      case KernelKind::Custom: return value_fn_(r);
    }
    return Scalar(0);
  }

  Scalar radial_derivative(Scalar r) const {
    require_positive(r);
    switch (kind_) {
      case KernelKind::Euler: return -coefficient_ / r;
      case KernelKind::Sqg: return -exponent_ * coefficient_ * std::pow(r, -exponent_ - Scalar(1));
      case KernelKind::Custom: return derivative_fn_(r);
    }
    return Scalar(0);
  }

 private:
  KernelProfile() = default;

  static void require_positive(Scalar r) {
    if (!(r > Scalar(0))) {
      std::ostringstream msg;
      msg << "kernel profile evaluated at r = " << r << " (requires r > 0)";
      throw std::domain_error(msg.str());
    }
  }

  void check_custom_consistency() const {
    for (int k = 0; k <= 60; ++k) {
      const Scalar r = std::pow(Scalar(10), Scalar(-3) + Scalar(k) / Scalar(10));
      const Scalar h = Scalar(1e-5) * r;
      const Scalar fd = (value_fn_(r + h) - value_fn_(r - h)) / (Scalar(2) * h);
      const Scalar d = derivative_fn_(r);
      const Scalar v = value_fn_(r);
      if (!std::isfinite(d) || !std::isfinite(v)) {
        throw std::invalid_argument("custom kernel '" + name_ + "' is not finite on r > 0");
      }
      // Round-off in the difference quotient scales with |G| / h.
      const Scalar floor = Scalar(1e-9) * std::abs(v) / r + std::numeric_limits<Scalar>::min();
      if (std::abs(fd - d) > Scalar(1e-6) * std::max(std::abs(d), floor)) {
        std::ostringstream msg;
        msg << "custom kernel '" << name_ << "': radial derivative " << d << " disagrees with finite difference "
            << fd << " at r = " << r;
        throw std::invalid_argument(msg.str());
      }
    }
  }

  KernelKind kind_ = KernelKind::Euler;
  Scalar s_ = Scalar(1);
  Scalar coefficient_ = Scalar(0);
  Scalar exponent_ = Scalar(0);
  bool singular_ = true;
  std::string name_;
  Function value_fn_;
  Function derivative_fn_;
};

/// C^1 regularization of a kernel profile below a cutoff epsilon.
///
/// For q >= epsilon the base profile is used unchanged. Below the cutoff the
/// profile is replaced by the quadratic cap
///   G(eps) - (eps G'(eps) / 2) (1 - q^2 / eps^2)
/// which matches value and slope at the junction and has zero slope at the
/// origin. For SQG this is G(eps) [1 + (1-s)(1 - q^2/eps^2)], for Euler
/// G_1(eps) + (1 - q^2/eps^2) / (4 pi).
template <typename Scalar_>
class RegularizedKernel {
 public:
  using Scalar = Scalar_;

  RegularizedKernel(KernelProfile<Scalar> base, Scalar epsilon) : base_(std::move(base)), epsilon_(epsilon) {
    if (!(epsilon > Scalar(0) && epsilon <= Scalar(0.5))) {
      std::ostringstream msg;
      msg << "regularization cutoff epsilon = " << epsilon << " outside (0, 1/2]";
      throw std::domain_error(msg.str());
    }
    value_at_cutoff_ = base_.value(epsilon_);
    slope_at_cutoff_ = base_.radial_derivative(epsilon_);
  }

  const KernelProfile<Scalar>& base() const { return base_; }
  Scalar epsilon() const { return epsilon_; }
  bool singular_at_zero() const { return false; }

  Scalar value(Scalar q) const {
    require_nonnegative(q);
    if (q >= epsilon_) return base_.value(q);
    const Scalar u = q / epsilon_;
    return value_at_cutoff_ - Scalar(0.5) * epsilon_ * slope_at_cutoff_ * (Scalar(1) - u * u);
  }

  Scalar radial_derivative(Scalar q) const {
    require_nonnegative(q);
    if (q >= epsilon_) return base_.radial_derivative(q);
    return slope_at_cutoff_ * (q / epsilon_);
  }

 private:
  static void require_nonnegative(Scalar q) {
    if (!(q >= Scalar(0))) throw std::domain_error("regularized kernel evaluated at negative radius");
  }

  KernelProfile<Scalar> base_;
  Scalar epsilon_;
  Scalar value_at_cutoff_;
  Scalar slope_at_cutoff_;
};

template <typename Scalar>
RegularizedKernel<Scalar> regularize(const KernelProfile<Scalar>& profile, Scalar epsilon) {
  return RegularizedKernel<Scalar>(profile, epsilon);
}

/// Regularized power law L_a(q) = q^(-2-a) used by the collapse-rate
/// functional.
///
/// With k = 2 + a the quadratic cap above would reach (1 + k/2) L(eps) > 2 L(eps)
/// at the origin, so the cap here saturates: writing t = 1 - q/eps,
///   L_{a,eps}(q) = L(eps) [1 + k t - k t^2 / (2 tau)]   for t <= tau = 2/k,
///   L_{a,eps}(q) = 2 L(eps)                             for t >  tau.
/// The slope decays linearly from L'(eps) to zero, so the profile is C^1, flat
/// near the origin, never exceeds L_a, and never exceeds 2 L(eps).
template <typename Scalar_>
class AuxiliaryKernel {
 public:
  using Scalar = Scalar_;

  AuxiliaryKernel(Scalar a_param, Scalar epsilon) : a_(a_param), epsilon_(epsilon) {
    if (!(a_param > Scalar(0))) throw std::domain_error("auxiliary kernel requires a > 0");
    if (!(epsilon > Scalar(0))) throw std::domain_error("auxiliary kernel requires epsilon > 0");
    k_ = Scalar(2) + a_;
    tau_ = Scalar(2) / k_;
    value_at_cutoff_ = base_value(epsilon_);
  }

  Scalar a_param() const { return a_; }
  Scalar epsilon() const { return epsilon_; }
  bool singular_at_zero() const { return false; }

  Scalar base_value(Scalar q) const { return std::pow(q, -k_); }
  Scalar base_radial_derivative(Scalar q) const { return -k_ * std::pow(q, -k_ - Scalar(1)); }

  Scalar value(Scalar q) const {
    if (q >= epsilon_) return base_value(q);
    const Scalar t = Scalar(1) - q / epsilon_;
    if (t >= tau_) return Scalar(2) * value_at_cutoff_;
    return value_at_cutoff_ * (Scalar(1) + k_ * t - k_ * t * t / (Scalar(2) * tau_));
  }

  Scalar radial_derivative(Scalar q) const {
    if (q >= epsilon_) return base_radial_derivative(q);
    const Scalar t = Scalar(1) - q / epsilon_;
    if (t >= tau_) return Scalar(0);
    // d/dq = -(1/eps) d/dt
    return -value_at_cutoff_ * k_ * (Scalar(1) - t / tau_) / epsilon_;
  }

 private:
  Scalar a_;
  Scalar epsilon_;
  Scalar k_;
  Scalar tau_;
  Scalar value_at_cutoff_;
};

template <RadialKernel K>
typename K::Scalar green_value(const K& kernel, typename K::Scalar r) {
  return kernel.value(r);
}

/// (dG/dr)(|x|) x_perp / |x|. Zero at the origin for non-singular kernels.
template <RadialKernel K>
Vec2<typename K::Scalar> perp_gradient(const K& kernel, const Vec2<typename K::Scalar>& x) {
  using Scalar = typename K::Scalar;
  const Scalar r = x.norm();
  if (r == Scalar(0)) {
    if (kernel.singular_at_zero()) throw SingularityError("perp_gradient of a singular kernel at x = 0");
    return Vec2<Scalar>::Zero();
  }
  return (kernel.radial_derivative(r) / r) * perp(x);
}

/// Outcome of sampling a regularized kernel against its base profile.
struct ConditionCheck {
  bool pass = true;
  /// Smallest slack (bound - |lhs|) over the grid, relative to the bound.
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_at = 0.0;
  int violations = 0;
};

struct RegularizationReport {
  double epsilon = 0.0;
  int grid_points = 0;
  double grid_extent = 0.0;
  ConditionCheck matches_base;        // value(q) == G(q) for q >= eps
  ConditionCheck bounded_by_base;     // |value(q)| <= |G(q)|
  ConditionCheck slope_bounded;       // |value'(q)| <= |G'(eps)| for q <= eps
  ConditionCheck bounded_by_twice;    // |value(q)| <= 2 |G(eps)|
  double junction_value_residual = 0.0;
  double junction_slope_residual = 0.0;
  double max_fd_error_away = 0.0;     // derivative vs central FD, away from the junction
  double max_fd_error_junction = 0.0; // same within [0.99 eps, 1.01 eps]

  bool conditions_pass() const {
    return matches_base.pass && bounded_by_base.pass && slope_bounded.pass && bounded_by_twice.pass;
  }
  double junction_residual() const { return std::max(junction_value_residual, junction_slope_residual); }
};

namespace detail {

inline void record(ConditionCheck& check, double lhs, double bound, double q) {
  // Two ulps of slack for quantities that agree analytically.
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(bound);
  const double margin = bound == 0.0 ? bound - lhs : (bound - lhs) / std::abs(bound);
  if (margin < check.worst_margin) {
    check.worst_margin = margin;
    check.worst_at = q;
  }
  if (lhs > bound + slack) {
    ++check.violations;
    check.pass = false;
  }
}

}  // namespace detail

/// Samples the four domination conditions on a uniform grid over
/// [0, extent * epsilon] and checks C^1 regularity at the junction.
template <typename Scalar>
RegularizationReport check_regularization(const RegularizedKernel<Scalar>& kernel, int grid_points = 2000,
                                          double extent = 10.0) {
  const auto& base = kernel.base();
  const double eps = static_cast<double>(kernel.epsilon());
  const double g_eps = static_cast<double>(base.value(Scalar(eps)));
  const double dg_eps = static_cast<double>(base.radial_derivative(Scalar(eps)));

  RegularizationReport report;
  report.epsilon = eps;
  report.grid_points = grid_points;
  report.grid_extent = extent;

  for (int k = 0; k < grid_points; ++k) {
    const double q = extent * eps * double(k) / double(grid_points - 1);
    const double v = static_cast<double>(kernel.value(Scalar(q)));
    const double dv = static_cast<double>(kernel.radial_derivative(Scalar(q)));
    if (q >= eps) {
      const double g = static_cast<double>(base.value(Scalar(q)));
      detail::record(report.matches_base, std::abs(v - g), 0.0, q);
    }
    if (q > 0.0) {
      detail::record(report.bounded_by_base, std::abs(v), std::abs(static_cast<double>(base.value(Scalar(q)))), q);
    }
    if (q <= eps) detail::record(report.slope_bounded, std::abs(dv), std::abs(dg_eps), q);
    detail::record(report.bounded_by_twice, std::abs(v), 2.0 * std::abs(g_eps), q);
  }

  // One-sided second-order slopes on either side of the junction.
  const double h = 1e-4 * eps;
  auto val = [&](double q) { return static_cast<double>(kernel.value(Scalar(q))); };
  const double left = (3.0 * val(eps) - 4.0 * val(eps - h) + val(eps - 2.0 * h)) / (2.0 * h);
  const double right = (-3.0 * val(eps) + 4.0 * val(eps + h) - val(eps + 2.0 * h)) / (2.0 * h);
  const double scale = std::max(std::abs(dg_eps), 1e-300);
  report.junction_slope_residual = std::abs(left - right) / scale;
  const double below = val(eps * (1.0 - 1e-12));
  report.junction_value_residual = std::abs(below - g_eps) / std::max(std::abs(g_eps), 1.0);

  // Derivative against central differences of the value.
  for (int k = 1; k < 200; ++k) {
    const double q = extent * eps * double(k) / 200.0;
    const bool near_junction = std::abs(q - eps) <= 0.01 * eps;
    if (std::abs(q - eps) < 1e-6 * eps) continue;
    const double hq = 1e-6 * eps;
    const double fd = (val(q + hq) - val(q - hq)) / (2.0 * hq);
    const double d = static_cast<double>(kernel.radial_derivative(Scalar(q)));
    const double err = std::abs(fd - d) / std::max(std::abs(d), 1e-3 * scale);
    if (near_junction) {
      report.max_fd_error_junction = std::max(report.max_fd_error_junction, err);
    } else {
      report.max_fd_error_away = std::max(report.max_fd_error_away, err);
    }
  }
  for (double f : {0.99, 0.995, 1.005, 1.01}) {
    const double q = f * eps;
    const double hq = 1e-6 * eps;
    const double fd = (val(q + hq) - val(q - hq)) / (2.0 * hq);
    const double d = static_cast<double>(kernel.radial_derivative(Scalar(q)));
    report.max_fd_error_junction = std::max(report.max_fd_error_junction, std::abs(fd - d) / std::abs(d));
  }
  return report;
}

}  // namespace vortexlab
