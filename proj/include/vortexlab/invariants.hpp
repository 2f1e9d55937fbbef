#pragma once

// Conserved quantities of the point-vortex flow and cluster diagnostics on
// the intensities.

#include <vortexlab/kernels.hpp>
#include <vortexlab/system.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>

namespace vortexlab {

/// H = sum over ordered pairs i != j of a_i a_j G(|x_i - x_j|).
template <RadialKernel K>
typename K::Scalar hamiltonian(const VortexSystem<typename K::Scalar>& system, const K& kernel) {
  using Scalar = typename K::Scalar;
  Scalar h = 0;
  for (int i = 0; i < system.size(); ++i) {
    for (int j = 0; j < system.size(); ++j) {
      if (i == j) continue;
      const Scalar r = (system.position(i) - system.position(j)).norm();
      if (r == Scalar(0) && kernel.singular_at_zero()) {
        throw SingularityError("hamiltonian: coincident vortices under a singular kernel", i, j);
      }
      h += system.intensity(i) * system.intensity(j) * kernel.value(r);
    }
  }
  return h;
}

template <typename Scalar>
Vec2<Scalar> vorticity_vector(const VortexSystem<Scalar>& system) {
  return system.positions() * system.intensities();
}

template <typename Scalar>
Scalar moment_of_inertia(const VortexSystem<Scalar>& system) {
  return system.positions().colwise().squaredNorm().dot(system.intensities().transpose());
}

/// Absent for neutral systems (zero total intensity).
template <typename Scalar>
std::optional<Vec2<Scalar>> center_of_vorticity(const VortexSystem<Scalar>& system) {
  const Scalar total = system.total_intensity();
  if (total == Scalar(0)) return std::nullopt;
  return Vec2<Scalar>(vorticity_vector(system) / total);
}

template <typename Scalar>
struct CollapseConstraint {
  Scalar value;          // sum over ordered pairs of a_i a_j |x_i - x_j|^2
  Scalar from_identity;  // 2 (sum a_i) I - 2 |M|^2
  Scalar relative_residual;
};

template <typename Scalar>
CollapseConstraint<Scalar> collapse_constraint(const VortexSystem<Scalar>& system) {
  Scalar direct = 0;
  for (int i = 0; i < system.size(); ++i) {
    for (int j = 0; j < system.size(); ++j) {
      if (i == j) continue;
      direct += system.intensity(i) * system.intensity(j) * (system.position(i) - system.position(j)).squaredNorm();
    }
  }
  const Scalar inertia_term = Scalar(2) * system.total_intensity() * moment_of_inertia(system);
  const Scalar impulse_term = Scalar(2) * vorticity_vector(system).squaredNorm();
  const Scalar identity = inertia_term - impulse_term;
  // Relative to the largest term entering either side; C itself may vanish.
  const Scalar scale = std::max({std::abs(direct), std::abs(inertia_term), std::abs(impulse_term),
                                 std::numeric_limits<Scalar>::min()});
  return {direct, identity, std::abs(direct - identity) / scale};
}

/// max over pairs of |x_i - x_j|; 0 for a single vortex.
template <typename Scalar>
Scalar diameter(const VortexSystem<Scalar>& system) {
  Scalar d = 0;
  for (int i = 0; i < system.size(); ++i) {
    for (int j = i + 1; j < system.size(); ++j) d = std::max(d, (system.position(i) - system.position(j)).norm());
  }
  return d;
}

template <typename Scalar>
struct InvariantSnapshot {
  Scalar hamiltonian;
  Vec2<Scalar> vorticity_vector;
  Scalar moment_of_inertia;
  Scalar collapse_constraint;
  Scalar diameter;
  std::optional<Vec2<Scalar>> center_of_vorticity;
};

template <RadialKernel K>
InvariantSnapshot<typename K::Scalar> snapshot(const VortexSystem<typename K::Scalar>& system, const K& kernel) {
  return {hamiltonian(system, kernel), vorticity_vector(system), moment_of_inertia(system),
          collapse_constraint(system).value, diameter(system), center_of_vorticity(system)};
}

enum class ClusterClass { NonNeutralClusters, NonNeutralSubClusters, Neutral };

inline const char* to_string(ClusterClass c) {
  switch (c) {
    case ClusterClass::NonNeutralClusters: return "non-neutral-clusters";
    case ClusterClass::NonNeutralSubClusters: return "non-neutral-sub-clusters";
    case ClusterClass::Neutral: return "neutral";
  }
  return "unknown";
}

struct ClusterDiagnostics {
  double total_abs = 0.0;              // sum |a_i|
  double min_proper_subset_sum = 0.0;  // min |sum_P a_i| over nonempty proper P; +inf for N = 1
  double min_subset_sum = 0.0;         // same over all nonempty P
  ClusterClass classification = ClusterClass::Neutral;
};

inline constexpr int kMaxClusterSize = 24;

/// Exhaustive enumeration of the 2^N - 1 nonempty subsets.
///
/// Subset sums within 64 ulps of sum |a_i| are treated as zero when
/// classifying, so decimal inputs such as (0.1, 0.2, -0.3) classify as their
/// exact counterparts would.
inline ClusterDiagnostics cluster_diagnostics(std::span<const double> intensities) {
  const int n = static_cast<int>(intensities.size());
  if (n < 1) throw std::invalid_argument("cluster_diagnostics: no intensities");
  if (n > kMaxClusterSize) throw std::length_error("cluster_diagnostics: N > 24 is not supported");

  ClusterDiagnostics out;
  for (double a : intensities) out.total_abs += std::abs(a);

  const std::uint32_t full = (1u << n) - 1u;
  double min_proper = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += intensities[i];
    }
    if (mask == full) {
      total = std::abs(sum);
    } else {
      min_proper = std::min(min_proper, std::abs(sum));
    }
  }
  out.min_proper_subset_sum = min_proper;
  out.min_subset_sum = std::min(min_proper, total);

  const double zero = 64.0 * std::numeric_limits<double>::epsilon() * out.total_abs;
  if (out.min_subset_sum > zero) {
    out.classification = ClusterClass::NonNeutralClusters;
  } else if (out.min_proper_subset_sum > zero) {
    out.classification = ClusterClass::NonNeutralSubClusters;
  } else {
    out.classification = ClusterClass::Neutral;
  }
  return out;
}

inline ClusterDiagnostics cluster_diagnostics(const Vector<double>& intensities) {
  return cluster_diagnostics(std::span<const double>(intensities.data(), static_cast<std::size_t>(intensities.size())));
}

}  // namespace vortexlab
