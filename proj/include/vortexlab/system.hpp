#pragma once

#include <vortexlab/types.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace vortexlab {

/// N signed intensities and N planar positions: a point in R^{2N}.
template <typename Scalar>
class VortexSystem {
 public:
  VortexSystem(Vector<Scalar> intensities, Points<Scalar> positions)
      : intensities_(std::move(intensities)), positions_(std::move(positions)) {
    if (intensities_.size() < 1) throw std::invalid_argument("vortex system needs at least one vortex");
    if (positions_.cols() != intensities_.size()) {
      throw std::invalid_argument("vortex system: intensity and position counts differ");
    }
    for (Eigen::Index i = 0; i < intensities_.size(); ++i) {
      if (intensities_[i] == Scalar(0) || !std::isfinite(intensities_[i])) {
        std::ostringstream msg;
        msg << "vortex " << i << " has intensity " << intensities_[i] << " (must be finite and nonzero)";
        throw std::invalid_argument(msg.str());
      }
    }
    if (!positions_.allFinite()) throw std::invalid_argument("vortex system: non-finite position");
  }

  int size() const { return static_cast<int>(intensities_.size()); }
  const Vector<Scalar>& intensities() const { return intensities_; }
  const Points<Scalar>& positions() const { return positions_; }
  Points<Scalar>& positions() { return positions_; }
  Vec2<Scalar> position(int i) const { return positions_.col(i); }
  Scalar intensity(int i) const { return intensities_[i]; }

  Scalar total_intensity() const { return intensities_.sum(); }

  /// Flat phase-space coordinates (x1_x, x1_y, ...).
  Vector<Scalar> state() const { return Eigen::Map<const Vector<Scalar>>(positions_.data(), 2 * size()); }

  VortexSystem with_state(const Vector<Scalar>& state) const {
    return VortexSystem(intensities_, Eigen::Map<const Points<Scalar>>(state.data(), 2, size()));
  }

  /// Throws SingularityError naming the first coincident pair.
  void require_separated() const {
    for (int i = 0; i < size(); ++i) {
      for (int j = i + 1; j < size(); ++j) {
        if ((positions_.col(i) - positions_.col(j)).norm() == Scalar(0)) {
          std::ostringstream msg;
          msg << "vortices " << i << " and " << j << " coincide";
          throw SingularityError(msg.str(), i, j);
        }
      }
    }
  }

 private:
  Vector<Scalar> intensities_;
  Points<Scalar> positions_;
};

/// Differences y_ij = x_i - x_j for a fixed anchor i, stored for j != i in
/// increasing j.
template <typename Scalar>
class RelativeSystem {
 public:
  RelativeSystem(int anchor, Vector<Scalar> intensities, Points<Scalar> differences)
      : anchor_(anchor), intensities_(std::move(intensities)), differences_(std::move(differences)) {
    const auto n = intensities_.size();
    if (n < 1) throw std::invalid_argument("relative system needs at least one vortex");
    if (anchor_ < 0 || anchor_ >= n) throw std::invalid_argument("relative system: anchor index out of range");
    if (differences_.cols() != n - 1) throw std::invalid_argument("relative system: expected N-1 differences");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (intensities_[i] == Scalar(0) || !std::isfinite(intensities_[i])) {
        throw std::invalid_argument("relative system: intensities must be finite and nonzero");
      }
    }
    if (!differences_.allFinite()) throw std::invalid_argument("relative system: non-finite difference");
  }

  int anchor() const { return anchor_; }
  int size() const { return static_cast<int>(intensities_.size()); }
  const Vector<Scalar>& intensities() const { return intensities_; }
  const Points<Scalar>& differences() const { return differences_; }
  Points<Scalar>& differences() { return differences_; }

  /// Vortex index j for the column c of differences().
  int partner(int column) const { return column < anchor_ ? column : column + 1; }
  /// Column of differences() holding y_{anchor, j}.
  int column(int j) const { return j < anchor_ ? j : j - 1; }

  Vector<Scalar> state() const {
    return Eigen::Map<const Vector<Scalar>>(differences_.data(), 2 * (size() - 1));
  }

  RelativeSystem with_state(const Vector<Scalar>& state) const {
    return RelativeSystem(anchor_, intensities_, Eigen::Map<const Points<Scalar>>(state.data(), 2, size() - 1));
  }

 private:
  int anchor_;
  Vector<Scalar> intensities_;
  Points<Scalar> differences_;
};

template <typename Scalar>
RelativeSystem<Scalar> to_relative(const VortexSystem<Scalar>& system, int anchor) {
  const int n = system.size();
  if (anchor < 0 || anchor >= n) throw std::invalid_argument("to_relative: anchor index out of range");
  Points<Scalar> y(2, n - 1);
  for (int j = 0, c = 0; j < n; ++j) {
    if (j == anchor) continue;
    y.col(c++) = system.position(anchor) - system.position(j);
  }
  return RelativeSystem<Scalar>(anchor, system.intensities(), std::move(y));
}

/// Absolute positions with the anchor placed at anchor_position.
template <typename Scalar>
VortexSystem<Scalar> from_relative(const RelativeSystem<Scalar>& rel,
                                   const Vec2<Scalar>& anchor_position = Vec2<Scalar>::Zero()) {
  const int n = rel.size();
  Points<Scalar> x(2, n);
  x.col(rel.anchor()) = anchor_position;
  for (int c = 0; c < n - 1; ++c) x.col(rel.partner(c)) = anchor_position - rel.differences().col(c);
  return VortexSystem<Scalar>(rel.intensities(), std::move(x));
}

struct ClosestPair {
  double distance = std::numeric_limits<double>::infinity();
  int first = -1;
  int second = -1;
};

template <typename Scalar>
ClosestPair closest_pair(const Points<Scalar>& x) {
  ClosestPair best;
  for (int i = 0; i < x.cols(); ++i) {
    for (int j = i + 1; j < x.cols(); ++j) {
      const double d = static_cast<double>((x.col(i) - x.col(j)).norm());
      if (d < best.distance) best = {d, i, j};
    }
  }
  return best;
}

/// Smallest |y_ij| over the anchor's partners.
template <typename Scalar>
ClosestPair closest_to_anchor(const RelativeSystem<Scalar>& rel) {
  ClosestPair best;
  for (int c = 0; c < rel.size() - 1; ++c) {
    const double d = static_cast<double>(rel.differences().col(c).norm());
    if (d < best.distance) best = {d, rel.anchor(), rel.partner(c)};
  }
  return best;
}

/// Smallest separation over all pairs, i.e. |y_ij| and |y_ij - y_ik|.
template <typename Scalar>
ClosestPair closest_pair(const RelativeSystem<Scalar>& rel) {
  ClosestPair best = closest_to_anchor(rel);
  const auto& y = rel.differences();
  for (int c = 0; c < y.cols(); ++c) {
    for (int e = c + 1; e < y.cols(); ++e) {
      const double d = static_cast<double>((y.col(c) - y.col(e)).norm());
      if (d < best.distance) best = {d, rel.partner(c), rel.partner(e)};
    }
  }
  return best;
}

}  // namespace vortexlab
