#include "bingham/network.hpp"

#include <cmath>
#include <random>

#include "bingham/error.hpp"

namespace bingham {

void ToyNetwork::compute_offsets() {
  if (sizes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "network needs at least two layer sizes");
  offsets_.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw Error(ErrorCode::InvalidArgument, "empty layer");
    offsets_.push_back(off);
    off += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  offsets_.push_back(off);
}

ToyNetwork::ToyNetwork(std::vector<std::size_t> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
  compute_offsets();
  params_.assign(offsets_.back(), 0.0);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers(); ++l) {
    const double a = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
    std::uniform_real_distribution<double> u(-a, a);
    const std::size_t nw = sizes_[l + 1] * sizes_[l];
    for (std::size_t i = 0; i < nw; ++i) params_[offsets_[l] + i] = u(rng);
  }
}

ToyNetwork::ToyNetwork(std::vector<std::size_t> sizes, std::vector<double> params)
    : sizes_(std::move(sizes)), params_(std::move(params)) {
  compute_offsets();
  if (params_.size() != offsets_.back()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter count does not match layer sizes");
  }
}

Eigen::MatrixXd ToyNetwork::forward(const Eigen::MatrixXd& X) const {
  Cache cache;
  return forward(X, cache);
}

Eigen::MatrixXd ToyNetwork::forward(const Eigen::MatrixXd& X, Cache& cache) const {
  if (static_cast<std::size_t>(X.rows()) != input_size()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(X.rows()) + " rows, expected " +
                                              std::to_string(input_size()));
  }
  cache.activations.assign(1, X);
  for (std::size_t l = 0; l < layers(); ++l) {
    const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes_[l]);
    const MatMap W(params_.data() + offsets_[l], rows, cols);
    const VecMap b(params_.data() + offsets_[l] + rows * cols, rows);
    Eigen::MatrixXd z = W * cache.activations.back();
    z.colwise() += b;
    if (l + 1 < layers()) z = z.array().tanh();
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

void ToyNetwork::backward(const Cache& cache, const Eigen::MatrixXd& grad_out, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "gradient buffer size");
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t l = layers(); l-- > 0;) {
    const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes_[l]);
    if (l + 1 < layers()) {
      const auto& a = cache.activations[l + 1];
      delta = delta.array() * (1.0 - a.array().square());
    }
    Eigen::Map<Eigen::MatrixXd> gW(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gW.noalias() = delta * cache.activations[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      const MatMap W(params_.data() + offsets_[l], rows, cols);
      delta = W.transpose() * delta;
    }
  }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace bingham
