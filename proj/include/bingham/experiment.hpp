#pragma once

#include <cstdint>
#include <vector>

#include "bingham/metrics.hpp"
#include "bingham/scene.hpp"
#include "bingham/serialization.hpp"
#include "bingham/table.hpp"
#include "bingham/trainer.hpp"

namespace bingham {

/// A full train-and-evaluate run on a synthetic scene.
struct ExperimentConfig {
  SceneSpec scene{SceneKind::Cyclic, 4};
  TrainConfig train;
  std::size_t train_samples = 2000;
  std::size_t test_samples = 300;
  std::vector<RecallSpec> specs = default_specs();

  static std::vector<RecallSpec> default_specs();
  void validate() const;
};

struct ExperimentResult {
  HeadLayout layout;
  TrainResult train;
  std::vector<SamplePrediction> predictions;
  EvalReport report;
};

/// Training data uses seed, held-out data seed + 1; the network is
/// initialized from seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const NormalizationTable& table,
                                const EpochCallback& on_epoch = {});

Json to_json(const ExperimentConfig& cfg);
/// run.json: {format, config, train: {loss_trace, clamp_events}, metrics, predictions}.
Json run_to_json(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace bingham
