#include "bingham/head.hpp"

#include <algorithm>
#include <cmath>

#include "bingham/error.hpp"

namespace bingham {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd softmax_backward(const Eigen::VectorXd& w, const Eigen::VectorXd& grad_w) {
  return w.cwiseProduct(grad_w.array().matrix() - Eigen::VectorXd::Constant(w.size(), w.dot(grad_w)));
}

BinghamDistribution DecodedHead::distribution(std::size_t k) const {
  const auto& c = components.at(k);
  return BinghamDistribution(c.V, c.lambda, c.norm);
}

BinghamMixture DecodedHead::mixture() const {
  std::vector<BinghamDistribution> comps;
  comps.reserve(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) comps.push_back(distribution(k));
  return BinghamMixture(std::move(comps), std::vector<double>(weights.data(), weights.data() + weights.size()));
}

GaussianMixture DecodedHead::gaussian_mixture() const {
  std::vector<GaussianComponent> comps;
  for (const auto& c : components) comps.push_back(c.gaussian);
  return GaussianMixture(std::move(comps), std::vector<double>(weights.data(), weights.data() + weights.size()));
}

DecodedHead decode_head(const HeadLayout& layout, std::span<const double> raw,
                        const NormalizationTable* table) {
  if (raw.size() != layout.size()) throw Error(ErrorCode::ShapeMismatch, "raw head size mismatch");
  DecodedHead out;
  out.components.resize(layout.M);
  Eigen::VectorXd logits(layout.M);
  for (std::size_t k = 0; k < layout.M; ++k) {
    auto& c = out.components[k];
    const std::size_t lo = layout.lambda_offset(k);
    const Eigen::Vector3d lam = lambda_from_raw(Eigen::Vector3d(raw[lo], raw[lo + 1], raw[lo + 2]));
    c.V = build_V(layout.strategy, raw.subspan(layout.v_offset(k), layout.v_size()));
    if (table) {
      c.norm = table->interpolate_clamped(lam, &c.clamped);
      for (int i = 0; i < 3; ++i) {
        const auto& ax = table->grid().axes[i];
        c.lambda[i] = std::clamp(lam[i], ax.min, ax.max);
      }
    } else {
      for (int i = 0; i < 3; ++i) {
        c.clamped[i] = lam[i] < kOracleLambdaMin;
        c.lambda[i] = std::max(lam[i], kOracleLambdaMin);
      }
      c.norm = log_normalizer_quadrature(c.lambda);
      for (int i = 0; i < 3; ++i) {
        if (c.clamped[i]) c.norm.grad[i] = 0.0;
      }
    }
    // Per-axis clamping can break the ordering only if the axes differ.
    c.lambda[1] = std::min(c.lambda[1], c.lambda[0]);
    c.lambda[2] = std::min(c.lambda[2], c.lambda[1]);
    for (bool b : c.clamped) out.clamp_events += b ? 1 : 0;
    logits[k] = raw[layout.logit_offset(k)];
    if (layout.translation) {
      const std::size_t mo = layout.mean_offset(k), so = layout.sigma_offset(k);
      for (int i = 0; i < 3; ++i) {
        c.gaussian.mean[i] = raw[mo + i];
        c.gaussian.sigma2[i] = softplus(raw[so + i]) + kVarianceFloor;
      }
    }
  }
  out.weights = softmax(logits);
  return out;
}

ParamGrad::ParamGrad(std::size_t M)
    : lambda(M, Eigen::Vector3d::Zero()),
      V(M, Eigen::Matrix4d::Zero()),
      weights(Eigen::VectorXd::Zero(M)),
      logits(Eigen::VectorXd::Zero(M)),
      mean(M, Eigen::Vector3d::Zero()),
      sigma2(M, Eigen::Vector3d::Zero()) {}

void head_backward(const HeadLayout& layout, std::span<const double> raw, const DecodedHead& head,
                   const ParamGrad& grad, std::span<double> grad_raw) {
  if (grad_raw.size() != layout.size()) throw Error(ErrorCode::ShapeMismatch, "gradient size mismatch");
  const Eigen::VectorXd dlogits = softmax_backward(head.weights, grad.weights) + grad.logits;
  for (std::size_t k = 0; k < layout.M; ++k) {
    const auto& c = head.components[k];
    const std::size_t lo = layout.lambda_offset(k);
    Eigen::Vector3d dl = grad.lambda[k];
    for (int i = 0; i < 3; ++i) {
      if (c.clamped[i]) dl[i] = 0.0;
    }
    if (!dl.isZero(0.0)) {
      const Eigen::Vector3d o(raw[lo], raw[lo + 1], raw[lo + 2]);
      const Eigen::Vector3d d = lambda_from_raw_backward(o, dl);
      for (int i = 0; i < 3; ++i) grad_raw[lo + i] += d[i];
    }
    if (!grad.V[k].isZero(0.0)) {
      const std::size_t vo = layout.v_offset(k);
      build_V_backward(layout.strategy, raw.subspan(vo, layout.v_size()), grad.V[k],
                       grad_raw.subspan(vo, layout.v_size()));
    }
    grad_raw[layout.logit_offset(k)] += dlogits[k];
    if (layout.translation) {
      const std::size_t mo = layout.mean_offset(k), so = layout.sigma_offset(k);
      for (int i = 0; i < 3; ++i) {
        grad_raw[mo + i] += grad.mean[k][i];
        grad_raw[so + i] += grad.sigma2[k][i] * sigmoid(raw[so + i]);
      }
    }
  }
}

}  // namespace bingham
