#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace bingham {

/// Fully connected network with tanh hidden activations and a linear output
/// layer. Parameters live in one flat vector (per layer: W column-major, then
/// b) so the optimizer and serializer can treat them uniformly.
class ToyNetwork {
 public:
  ToyNetwork() = default;
  /// sizes = {input, hidden..., output}; Glorot-uniform weights, zero biases.
  ToyNetwork(std::vector<std::size_t> sizes, std::uint64_t seed);
  ToyNetwork(std::vector<std::size_t> sizes, std::vector<double> params);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Columns of X are samples. Throws Error(ShapeMismatch) on a wrong row count.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each layer output
  };
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Cache& cache) const;

  /// Gradient of sum over the batch given dL/doutput; grad is overwritten.
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_out, std::span<double> grad) const;

 private:
  using MatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<const Eigen::VectorXd>;
  std::size_t layers() const { return sizes_.size() - 1; }
  void compute_offsets();

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // start of W for each layer
  std::vector<double> params_;
};

class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace bingham
