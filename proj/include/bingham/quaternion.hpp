#pragma once

#include <Eigen/Core>
#include <random>

namespace bingham {

/// Raw quaternion coefficients in (w, x, y, z) order.
using Vec4 = Eigen::Vector4d;

/// A rotation on S^3 stored in hemisphere-canonical form: unit norm, and the
/// first nonzero coefficient (scanning w, x, y, z) is positive. Every rotation
/// therefore has exactly one representative.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(1.0, 0.0, 0.0, 0.0) {}

  /// Normalizes and flips sign so the first nonzero coefficient is positive.
  /// Throws Error(ZeroNorm) when the norm is at most 1e-12.
  static UnitQuaternion canonicalize(const Vec4& q);
  static UnitQuaternion from_wxyz(double w, double x, double y, double z) {
    return canonicalize(Vec4(w, x, y, z));
  }
  static UnitQuaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);

  const Vec4& coeffs() const { return q_; }
  operator const Vec4&() const { return q_; }  // NOLINT: implicit by intent

  double w() const { return q_[0]; }
  double x() const { return q_[1]; }
  double y() const { return q_[2]; }
  double z() const { return q_[3]; }

  Eigen::Matrix3d rotation_matrix() const;
  Eigen::Vector3d rotate(const Eigen::Vector3d& p) const;
  UnitQuaternion inverse() const { return from_wxyz(w(), -x(), -y(), -z()); }

  bool operator==(const UnitQuaternion& o) const { return q_ == o.q_; }

 private:
  explicit UnitQuaternion(const Vec4& q) : q_(q) {}
  Vec4 q_;
};

/// Hamilton product a * b on raw coefficients.
Vec4 hamilton_product(const Vec4& a, const Vec4& b);

/// Rotation a followed by b in the body frame, i.e. a * b, canonicalized.
UnitQuaternion compose(const UnitQuaternion& a, const UnitQuaternion& b);

/// Uniformly distributed rotation (normalized 4D Gaussian draw).
UnitQuaternion random_rotation(std::mt19937_64& rng);

/// Rotation angle between two rotations, 2 acos(|a . b|), in [0, pi].
/// Inputs are unit 4-vectors; the sign of either input does not matter.
double geodesic_distance(const Vec4& a, const Vec4& b);

/// (a . b)^2 = cos^2(theta / 2).
double bingham_metric(const Vec4& a, const Vec4& b);

/// min(|a - b|_1, |a + b|_1).
double quaternion_l1(const Vec4& a, const Vec4& b);

constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace bingham
