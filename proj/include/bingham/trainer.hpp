#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "bingham/head.hpp"
#include "bingham/losses.hpp"
#include "bingham/metrics.hpp"
#include "bingham/network.hpp"
#include "bingham/scene.hpp"
#include "bingham/table.hpp"

namespace bingham {

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  /// Learning rate at epoch e is learning_rate * lr_decay^e.
  double lr_decay = 1.0;
  std::uint64_t seed = 7;
  std::size_t M = 1;
  VStrategy strategy = VStrategy::Birdal;
  LossConfig loss;
  std::vector<std::size_t> hidden = {64, 128, 128};
  /// Epochs between EWTA halvings of k; 0 spreads the halvings evenly.
  std::size_t ewta_interval = 0;
  /// Draw a fresh scene of the same kind and size for every epoch after the
  /// first, so the network cannot memorize which mode each input was labeled
  /// with.
  bool resample = true;

  void validate() const;
};

HeadLayout make_layout(const TrainConfig& cfg, const SceneSpec& scene);
ToyNetwork make_network(std::size_t input_size, const HeadLayout& layout, const TrainConfig& cfg);

struct TrainResult {
  /// Mean loss per epoch of the full objective, also during single-term stages.
  std::vector<double> loss_trace;
  std::size_t clamp_events = 0;
};

/// Called after every epoch with (epoch, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Minibatch Adam. With cfg.resample, epoch e > 0 trains on
/// generate_scene(scene.spec, n, resample_seed(cfg.seed, e)). Scenes with
/// translation labels train in three stages over 40/40/20% of the epochs:
/// translation only, rotation only, then both.
/// Throws Error(DivergenceDetected) if a network output or batch loss is not finite.
TrainResult train(ToyNetwork& net, const HeadLayout& layout, const SyntheticScene& scene,
                  const TrainConfig& cfg, const NormalizationTable& table,
                  const EpochCallback& on_epoch = {});

std::uint64_t resample_seed(std::uint64_t seed, std::size_t epoch);

DecodedHead predict(const ToyNetwork& net, const HeadLayout& layout, const Eigen::VectorXd& input,
                    const NormalizationTable& table);

/// One hypothesis per component, sorted by weight descending (stable).
std::vector<PoseHypothesis> predict_hypotheses(const ToyNetwork& net, const HeadLayout& layout,
                                               const Eigen::VectorXd& input,
                                               const NormalizationTable& table);

std::vector<SamplePrediction> predict_scene(const ToyNetwork& net, const HeadLayout& layout,
                                            const SyntheticScene& scene,
                                            const NormalizationTable& table);

}  // namespace bingham
