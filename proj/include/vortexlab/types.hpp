#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vortexlab {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Planar positions stored column-wise; the column-major layout doubles as
/// the flat phase-space vector (x1_x, x1_y, x2_x, ...).
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Pointsd = Points<double>;

/// Counterclockwise quarter turn.
template <typename Scalar>
inline Vec2<Scalar> perp(const Vec2<Scalar>& x) {
  return Vec2<Scalar>(-x.y(), x.x());
}

/// Raised when a singular kernel is evaluated at zero separation.
class SingularityError : public std::domain_error {
 public:
  SingularityError(const std::string& what, int first = -1, int second = -1)
      : std::domain_error(what), first_(first), second_(second) {}

  int first() const { return first_; }
  int second() const { return second_; }

 private:
  int first_;
  int second_;
};

}  // namespace vortexlab
