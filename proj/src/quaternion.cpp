#include "bingham/quaternion.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bingham/error.hpp"

namespace bingham {

UnitQuaternion UnitQuaternion::canonicalize(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 1e-12)) {
    throw Error(ErrorCode::ZeroNorm, "quaternion norm too small to normalize");
  }
  // Leave vectors that are already unit up to rounding untouched, so that
  // canonicalization is idempotent bit for bit.
  Vec4 u = std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? q : Vec4(q / n);
  for (int i = 0; i < 4; ++i) {
    if (u[i] != 0.0) {
      if (u[i] < 0.0) u = -u;
      break;
    }
  }
  return UnitQuaternion(u);
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 1e-12)) throw Error(ErrorCode::ZeroNorm, "rotation axis has zero length");
  const Eigen::Vector3d a = axis / n;
  const double s = std::sin(0.5 * angle);
  return canonicalize(Vec4(std::cos(0.5 * angle), s * a.x(), s * a.y(), s * a.z()));
}

Eigen::Matrix3d UnitQuaternion::rotation_matrix() const {
  const double w = q_[0], x = q_[1], y = q_[2], z = q_[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Vector3d UnitQuaternion::rotate(const Eigen::Vector3d& p) const {
  const double w = q_[0];
  const Eigen::Vector3d v(q_[1], q_[2], q_[3]);
  return (w * w - v.squaredNorm()) * p + 2.0 * v.dot(p) * v + 2.0 * w * v.cross(p);
}

Vec4 hamilton_product(const Vec4& a, const Vec4& b) {
  return Vec4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

UnitQuaternion compose(const UnitQuaternion& a, const UnitQuaternion& b) {
  return UnitQuaternion::canonicalize(hamilton_product(a.coeffs(), b.coeffs()));
}

UnitQuaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vec4 v(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    if (v.norm() > 1e-6) return UnitQuaternion::canonicalize(v);
  }
}

double geodesic_distance(const Vec4& a, const Vec4& b) {
  // Half-angle form; acos loses about 8 digits near zero distance.
  const Vec4 c = a.dot(b) < 0.0 ? Vec4(-b) : b;
  return 4.0 * std::atan2((a - c).norm(), (a + c).norm());
}

double bingham_metric(const Vec4& a, const Vec4& b) {
  const double d = std::clamp(a.dot(b), -1.0, 1.0);
  return d * d;
}

double quaternion_l1(const Vec4& a, const Vec4& b) {
  return std::min((a - b).lpNorm<1>(), (a + b).lpNorm<1>());
}

}  // namespace bingham
