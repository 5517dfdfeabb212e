#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

#include "bingham/distribution.hpp"
#include "bingham/quaternion.hpp"

namespace bingham {

/// Floor applied to mixture weights inside logarithms.
inline constexpr double kWeightFloor = 1e-12;

class BinghamMixture {
 public:
  /// A single uniform component.
  BinghamMixture() : BinghamMixture({BinghamDistribution()}, {1.0}) {}
  /// Weights must be non-negative and sum to 1 within 1e-9.
  BinghamMixture(std::vector<BinghamDistribution> components, std::vector<double> weights);

  std::size_t size() const { return components_.size(); }
  const std::vector<BinghamDistribution>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }
  const BinghamDistribution& component(std::size_t i) const { return components_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// log sum_i w_i p_i(q) by log-sum-exp, each w_i floored at kWeightFloor.
  double log_pdf(const Vec4& q) const;

  /// Index of the heaviest component; ties go to the lowest index.
  std::size_t weighted_index() const;
  std::pair<UnitQuaternion, double> weighted_mode() const;

 private:
  std::vector<BinghamDistribution> components_;
  std::vector<double> weights_;
};

inline double mixture_log_pdf(const BinghamMixture& m, const Vec4& q) { return m.log_pdf(q); }

/// Diagonal-covariance Gaussian in R^3.
struct GaussianComponent {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d sigma2 = Eigen::Vector3d::Ones();

  void validate() const;
};

double gaussian_log_pdf(const GaussianComponent& g, const Eigen::Vector3d& t);
/// c/2 + (c/2) log(2 pi) + (1/2) log det(Sigma), c = 3.
double gaussian_entropy(const GaussianComponent& g);

class GaussianMixture {
 public:
  GaussianMixture(std::vector<GaussianComponent> components, std::vector<double> weights);

  std::size_t size() const { return components_.size(); }
  const std::vector<GaussianComponent>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }

  double log_pdf(const Eigen::Vector3d& t) const;

 private:
  std::vector<GaussianComponent> components_;
  std::vector<double> weights_;
};

struct PoseHypothesis {
  UnitQuaternion rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double weight = 1.0;
  double rot_entropy = 0.0;
  double trans_entropy = 0.0;
  double uncertainty = 0.0;           // sigmoid of the rotational entropy
  double combined_uncertainty = 0.0;  // see combined_uncertainty()
};

/// Per hypothesis: min-max normalize each entropy vector over the hypotheses
/// (a constant vector normalizes to zeros), then add the two. Output in [0, 2].
std::vector<double> combined_uncertainty(std::span<const double> rot_entropies,
                                         std::span<const double> trans_entropies);

/// Throws Error(InvalidArgument) unless weights are non-negative, finite and
/// sum to 1 within 1e-9.
void validate_weights(std::span<const double> weights, std::size_t expected);

}  // namespace bingham
