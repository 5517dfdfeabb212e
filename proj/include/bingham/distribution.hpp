#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "bingham/normalizer.hpp"
#include "bingham/quaternion.hpp"

namespace bingham {

/// Bingham distribution on S^3:
///   p(x) = exp(x^T V diag(0, l1, l2, l3) V^T x) / F(l1, l2, l3)
/// with V orthogonal and 0 >= l1 >= l2 >= l3. The first column of V is the
/// mode. Immutable once constructed.
class BinghamDistribution {
 public:
  /// Uniform distribution on S^3 (V = I, Lambda = 0).
  BinghamDistribution();

  /// Normalizer from the quadrature oracle.
  BinghamDistribution(const Eigen::Matrix4d& V, const Eigen::Vector3d& lambda);

  /// Normalizer supplied by the caller (e.g. from a NormalizationTable).
  BinghamDistribution(const Eigen::Matrix4d& V, const Eigen::Vector3d& lambda,
                      const LogNormalizer& normalizer);

  const Eigen::Matrix4d& V() const { return V_; }
  const Eigen::Vector3d& lambda() const { return lambda_; }
  double log_F() const { return norm_.log_F; }
  /// d log F / d lambda_i.
  const Eigen::Vector3d& grad_log_F() const { return norm_.grad; }

  Vec4 mode_vector() const { return V_.col(0); }
  UnitQuaternion mode() const { return UnitQuaternion::canonicalize(V_.col(0)); }

  /// sum_i lambda_i (v_{i+1}^T x)^2, always <= 0.
  double quadratic_form(const Vec4& x) const;
  double log_pdf(const Vec4& x) const { return quadratic_form(x) - norm_.log_F; }
  double pdf(const Vec4& x) const;

  /// log F - sum_i lambda_i d log F / d lambda_i.
  double entropy() const;
  /// sigmoid(entropy), in (0, 1).
  double uncertainty() const;

  /// Rejection sampling from an angular central Gaussian envelope. Draws are
  /// canonicalized and fully determined by the seed.
  std::vector<UnitQuaternion> sample(std::size_t n, std::uint64_t seed) const;

 private:
  void validate() const;

  Eigen::Matrix4d V_;
  Eigen::Vector3d lambda_;
  LogNormalizer norm_;
};

struct FitOptions {
  double lambda_min = -500.0;
  double moment_tolerance = 1e-6;
  int max_sweeps = 200;
};

/// Maximum-likelihood fit: V from the eigenvectors of the scatter matrix
/// (descending eigenvalues); each lambda_i solved so d log F / d lambda_i
/// matches the (i+1)-th eigenvalue, coordinate by coordinate, sweeping until
/// the largest moment residual falls below options.moment_tolerance.
/// Throws Error(EmptyInput) for fewer than 4 samples and
/// Error(DegenerateScatter) when adjacent eigenvalues are closer than 1e-9.
BinghamDistribution fit_mle(std::span<const Vec4> samples, const FitOptions& options = {});

/// (1/n) sum x x^T.
Eigen::Matrix4d scatter_matrix(std::span<const Vec4> samples);

}  // namespace bingham
