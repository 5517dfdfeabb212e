#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "bingham/mixture.hpp"
#include "bingham/normalizer.hpp"
#include "bingham/orientation.hpp"
#include "bingham/table.hpp"

namespace bingham {

/// Layout of the raw network head. Per component, in order: 3 concentration
/// raws, the V raws (4 or 16), one weight logit, and when translation is
/// enabled 3 mean raws followed by 3 variance raws.
struct HeadLayout {
  std::size_t M = 1;
  VStrategy strategy = VStrategy::Birdal;
  bool translation = false;

  std::size_t v_size() const { return v_raw_size(strategy); }
  std::size_t stride() const { return 4 + v_size() + (translation ? 6 : 0); }
  std::size_t size() const { return M * stride(); }

  std::size_t lambda_offset(std::size_t k) const { return k * stride(); }
  std::size_t v_offset(std::size_t k) const { return k * stride() + 3; }
  std::size_t logit_offset(std::size_t k) const { return k * stride() + 3 + v_size(); }
  std::size_t mean_offset(std::size_t k) const { return k * stride() + 4 + v_size(); }
  std::size_t sigma_offset(std::size_t k) const { return k * stride() + 7 + v_size(); }
};

/// Translation variances: softplus(raw) + 1e-6.
inline constexpr double kVarianceFloor = 1e-6;

struct DecodedComponent {
  Eigen::Matrix4d V = Eigen::Matrix4d::Identity();
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  LogNormalizer norm;
  std::array<bool, 3> clamped = {false, false, false};
  GaussianComponent gaussian;
};

/// Head outputs turned into distribution parameters, plus what the backward
/// pass needs.
struct DecodedHead {
  std::vector<DecodedComponent> components;
  Eigen::VectorXd weights;  // softmax of the logits
  std::size_t clamp_events = 0;

  BinghamDistribution distribution(std::size_t k) const;
  BinghamMixture mixture() const;
  GaussianMixture gaussian_mixture() const;
};

/// Lower concentration bound used when no table is supplied.
inline constexpr double kOracleLambdaMin = -500.0;

/// Decodes a raw head. Concentrations are clamped into the table range (or
/// [kOracleLambdaMin, 0] with the quadrature oracle when table is null);
/// every clamped coordinate counts as one clamp event.
DecodedHead decode_head(const HeadLayout& layout, std::span<const double> raw,
                        const NormalizationTable* table);

/// Loss gradients with respect to the decoded parameters.
struct ParamGrad {
  std::vector<Eigen::Vector3d> lambda;
  std::vector<Eigen::Matrix4d> V;
  Eigen::VectorXd weights;  // dL/dw before the softmax
  Eigen::VectorXd logits;   // added directly to the logit slots
  std::vector<Eigen::Vector3d> mean;
  std::vector<Eigen::Vector3d> sigma2;

  explicit ParamGrad(std::size_t M);
};

/// Maps parameter gradients back to the raw head and adds them to grad_raw.
/// Clamped concentration coordinates receive zero gradient.
void head_backward(const HeadLayout& layout, std::span<const double> raw, const DecodedHead& head,
                   const ParamGrad& grad, std::span<double> grad_raw);

Eigen::VectorXd softmax(const Eigen::VectorXd& z);
/// Vector-Jacobian product of softmax at w = softmax(z).
Eigen::VectorXd softmax_backward(const Eigen::VectorXd& w, const Eigen::VectorXd& grad_w);

}  // namespace bingham
