#pragma once

// Right-hand sides of the point-vortex equation in absolute and in anchored
// relative coordinates.

#include <vortexlab/kernels.hpp>
#include <vortexlab/system.hpp>

#include <sstream>

namespace vortexlab {

enum class Summation { Plain, Compensated };

namespace detail {

/// Neumaier-compensated accumulator for planar vectors.
template <typename Scalar>
struct CompensatedVec2 {
  Vec2<Scalar> sum = Vec2<Scalar>::Zero();
  Vec2<Scalar> carry = Vec2<Scalar>::Zero();

  void add(const Vec2<Scalar>& v) {
    for (int c = 0; c < 2; ++c) {
      const Scalar t = sum[c] + v[c];
      if (std::abs(sum[c]) >= std::abs(v[c])) {
        carry[c] += (sum[c] - t) + v[c];
      } else {
        carry[c] += (v[c] - t) + sum[c];
      }
      sum[c] = t;
    }
  }
  Vec2<Scalar> value() const { return sum + carry; }
};

template <RadialKernel K>
Vec2<typename K::Scalar> pair_field(const K& kernel, const Vec2<typename K::Scalar>& separation, int i, int j) {
  if (kernel.singular_at_zero() && separation.squaredNorm() == 0) {
    std::ostringstream msg;
    msg << "vortices " << i << " and " << j << " coincide under a singular kernel";
    throw SingularityError(msg.str(), i, j);
  }
  return perp_gradient(kernel, separation);
}

}  // namespace detail

/// dx_i/dt = sum_{j != i} a_j perp_gradient(x_i - x_j), summed in index order.
template <RadialKernel K>
Points<typename K::Scalar> velocity(const Points<typename K::Scalar>& positions,
                                   const Vector<typename K::Scalar>& intensities, const K& kernel,
                                   Summation summation = Summation::Plain) {
  using Scalar = typename K::Scalar;
  const int n = static_cast<int>(positions.cols());
  Points<Scalar> v(2, n);
  for (int i = 0; i < n; ++i) {
    if (summation == Summation::Plain) {
      Vec2<Scalar> acc = Vec2<Scalar>::Zero();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        acc += intensities[j] * detail::pair_field(kernel, Vec2<Scalar>(positions.col(i) - positions.col(j)), i, j);
      }
      v.col(i) = acc;
    } else {
      detail::CompensatedVec2<Scalar> acc;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        acc.add(intensities[j] * detail::pair_field(kernel, Vec2<Scalar>(positions.col(i) - positions.col(j)), i, j));
      }
      v.col(i) = acc.value();
    }
  }
  return v;
}

template <RadialKernel K>
Points<typename K::Scalar> velocity(const VortexSystem<typename K::Scalar>& system, const K& kernel,
                                   Summation summation = Summation::Plain) {
  return velocity(system.positions(), system.intensities(), kernel, summation);
}

/// dy_ij/dt = (a_i + a_j) pg(y_ij) + sum_{k != i,j} a_k [pg(y_ik) + pg(y_ij - y_ik)]
/// with pg the kernel's perp-gradient; columns follow rel.differences().
template <RadialKernel K>
Points<typename K::Scalar> relative_velocity(const Points<typename K::Scalar>& differences,
                                            const Vector<typename K::Scalar>& intensities, int anchor,
                                            const K& kernel, Summation summation = Summation::Plain) {
  using Scalar = typename K::Scalar;
  const int m = static_cast<int>(differences.cols());
  auto partner = [anchor](int c) { return c < anchor ? c : c + 1; };
  const Scalar a_i = intensities[anchor];

  // pg(y_ik) is shared by every row.
  Points<Scalar> anchor_field(2, m);
  for (int c = 0; c < m; ++c) {
    anchor_field.col(c) = detail::pair_field(kernel, Vec2<Scalar>(differences.col(c)), anchor, partner(c));
  }

  Points<Scalar> dy(2, m);
  for (int c = 0; c < m; ++c) {
    const int j = partner(c);
    const Vec2<Scalar> own = (a_i + intensities[j]) * anchor_field.col(c);
    if (summation == Summation::Plain) {
      Vec2<Scalar> acc = own;
      for (int e = 0; e < m; ++e) {
        if (e == c) continue;
        const int k = partner(e);
        const Vec2<Scalar> split = differences.col(c) - differences.col(e);
        acc += intensities[k] * (Vec2<Scalar>(anchor_field.col(e)) + detail::pair_field(kernel, split, j, k));
      }
      dy.col(c) = acc;
    } else {
      detail::CompensatedVec2<Scalar> acc;
      acc.add(own);
      for (int e = 0; e < m; ++e) {
        if (e == c) continue;
        const int k = partner(e);
        const Vec2<Scalar> split = differences.col(c) - differences.col(e);
        acc.add(intensities[k] * Vec2<Scalar>(anchor_field.col(e)));
        acc.add(intensities[k] * detail::pair_field(kernel, split, j, k));
      }
      dy.col(c) = acc.value();
    }
  }
  return dy;
}

template <RadialKernel K>
Points<typename K::Scalar> relative_velocity(const RelativeSystem<typename K::Scalar>& rel, const K& kernel,
                                            Summation summation = Summation::Plain) {
  return relative_velocity(rel.differences(), rel.intensities(), rel.anchor(), kernel, summation);
}

/// Central-difference estimate of div V at the given state, where V is the
/// velocity field on R^{2N}. Vanishes analytically for perp-gradient fields.
template <RadialKernel K>
typename K::Scalar phase_space_divergence(const VortexSystem<typename K::Scalar>& system, const K& kernel,
                                          typename K::Scalar h) {
  using Scalar = typename K::Scalar;
  if (system.size() == 1) return Scalar(0);
  Points<Scalar> x = system.positions();
  Scalar div = 0;
  for (int i = 0; i < system.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      const Scalar x0 = x(c, i);
      x(c, i) = x0 + h;
      const Scalar plus = velocity(x, system.intensities(), kernel)(c, i);
      x(c, i) = x0 - h;
      const Scalar minus = velocity(x, system.intensities(), kernel)(c, i);
      x(c, i) = x0;
      div += (plus - minus) / (Scalar(2) * h);
    }
  }
  return div;
}

/// Same estimate for the anchored relative dynamics on R^{2(N-1)}.
template <RadialKernel K>
typename K::Scalar phase_space_divergence(const RelativeSystem<typename K::Scalar>& rel, const K& kernel,
                                          typename K::Scalar h) {
  using Scalar = typename K::Scalar;
  Points<Scalar> y = rel.differences();
  Scalar div = 0;
  for (int e = 0; e < y.cols(); ++e) {
    for (int c = 0; c < 2; ++c) {
      const Scalar y0 = y(c, e);
      y(c, e) = y0 + h;
      const Scalar plus = relative_velocity(y, rel.intensities(), rel.anchor(), kernel)(c, e);
      y(c, e) = y0 - h;
      const Scalar minus = relative_velocity(y, rel.intensities(), rel.anchor(), kernel)(c, e);
      y(c, e) = y0;
      div += (plus - minus) / (Scalar(2) * h);
    }
  }
  return div;
}

/// Natural scale for the divergence: max |v_i| over the smallest separation.
template <RadialKernel K>
typename K::Scalar velocity_gradient_scale(const VortexSystem<typename K::Scalar>& system, const K& kernel) {
  using Scalar = typename K::Scalar;
  if (system.size() < 2) return Scalar(0);
  const auto v = velocity(system, kernel);
  const Scalar vmax = v.colwise().norm().maxCoeff();
  return vmax / Scalar(closest_pair(system.positions()).distance);
}

}  // namespace vortexlab
