#include "bingham/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "bingham/error.hpp"

namespace bingham {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double log_sum_exp(std::span<const double> terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

}  // namespace

void validate_weights(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected) {
    throw Error(ErrorCode::ShapeMismatch, "weight count does not match component count");
  }
  if (weights.empty()) throw Error(ErrorCode::EmptyInput, "mixture has no components");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw Error(ErrorCode::InvalidArgument, "negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "weights do not sum to 1");
}

BinghamMixture::BinghamMixture(std::vector<BinghamDistribution> components,
                               std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  validate_weights(weights_, components_.size());
}

double BinghamMixture::log_pdf(const Vec4& q) const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) {
    terms[i] = std::log(std::max(weights_[i], kWeightFloor)) + components_[i].log_pdf(q);
  }
  return log_sum_exp(terms);
}

std::size_t BinghamMixture::weighted_index() const {
  // max_element returns the first maximum, which is the tie-break we want.
  return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) -
                                  weights_.begin());
}

std::pair<UnitQuaternion, double> BinghamMixture::weighted_mode() const {
  const std::size_t i = weighted_index();
  return {components_[i].mode(), weights_[i]};
}

void GaussianComponent::validate() const {
  if (!mean.allFinite() || !sigma2.allFinite() || (sigma2.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian variances must be positive");
  }
}

double gaussian_log_pdf(const GaussianComponent& g, const Eigen::Vector3d& t) {
  const Eigen::Vector3d d = t - g.mean;
  return -0.5 * (d.array().square() / g.sigma2.array()).sum() -
         0.5 * g.sigma2.array().log().sum() - 1.5 * kLog2Pi;
}

double gaussian_entropy(const GaussianComponent& g) {
  return 1.5 + 1.5 * kLog2Pi + 0.5 * g.sigma2.array().log().sum();
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components,
                                 std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  validate_weights(weights_, components_.size());
  for (const auto& c : components_) c.validate();
}

double GaussianMixture::log_pdf(const Eigen::Vector3d& t) const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) {
    terms[i] = std::log(std::max(weights_[i], kWeightFloor)) + gaussian_log_pdf(components_[i], t);
  }
  return log_sum_exp(terms);
}

std::vector<double> combined_uncertainty(std::span<const double> rot_entropies,
                                         std::span<const double> trans_entropies) {
  if (rot_entropies.size() != trans_entropies.size()) {
    throw Error(ErrorCode::ShapeMismatch, "entropy vectors differ in length");
  }
  if (rot_entropies.empty()) throw Error(ErrorCode::EmptyInput, "no hypotheses");
  auto normalized = [](std::span<const double> e) {
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    std::vector<double> out(e.size(), 0.0);
    const double range = *hi - *lo;
    if (range > 0.0) {
      for (std::size_t i = 0; i < e.size(); ++i) out[i] = (e[i] - *lo) / range;
    }
    return out;
  };
  std::vector<double> out = normalized(rot_entropies);
  const std::vector<double> t = normalized(trans_entropies);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  return out;
}

}  // namespace bingham
