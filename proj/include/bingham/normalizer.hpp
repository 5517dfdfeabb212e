#pragma once

#include <Eigen/Core>

namespace bingham {

/// log F(Lambda) together with d log F / d lambda_i, i = 1..3.
///
/// Each gradient component equals E[(v_{i+1}^T x)^2] under the distribution,
/// so it lies in (0, 1) and the three sum to at most 1.
struct LogNormalizer {
  double log_F = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};

/// Normalizing constant F = integral over S^3 of exp(l1 x2^2 + l2 x3^2 + l3 x4^2)
/// evaluated by product Gauss-Legendre quadrature over hyperspherical angles.
///
/// The integrand is even in every coordinate, so each angle is reduced to
/// [0, pi/2]. Each reduced range is split into 8 panels graded geometrically
/// toward 0 (where the mass concentrates for descending non-positive Lambda),
/// with 8 nodes per panel: 64 nodes per angle, 64^3 evaluations per call.
/// Accurate to ~1e-9 in log F for Lambda in [-500, 0]^3, descending.
///
/// This is the slow reference path; training uses NormalizationTable.
LogNormalizer log_normalizer_quadrature(const Eigen::Vector3d& lambda);

double log_F_quadrature(const Eigen::Vector3d& lambda);
Eigen::Vector3d grad_log_F(const Eigen::Vector3d& lambda);

/// log(2 pi^2), the log surface area of S^3 (the uniform case).
inline constexpr double kLogSphereArea = 2.9826069522587457;

/// Number of quadrature nodes per angle.
inline constexpr int kQuadratureNodesPerAngle = 64;

}  // namespace bingham
