#include "bingham/experiment.hpp"

#include "bingham/error.hpp"

namespace bingham {

std::vector<RecallSpec> ExperimentConfig::default_specs() {
  return {{5.0, 0.05}, {10.0, 0.1}, {15.0, 0.2}, {20.0, 0.3}};
}

void ExperimentConfig::validate() const {
  train.validate();
  if (train_samples == 0 || test_samples == 0) {
    throw Error(ErrorCode::InvalidArgument, "sample counts must be positive");
  }
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "no recall thresholds");
  for (const auto& s : specs) s.validate();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const NormalizationTable& table,
                                const EpochCallback& on_epoch) {
  cfg.validate();
  const SyntheticScene train_scene = generate_scene(cfg.scene, cfg.train_samples, cfg.train.seed);
  const SyntheticScene test_scene = generate_scene(cfg.scene, cfg.test_samples, cfg.train.seed + 1);
  ExperimentResult r;
  r.layout = make_layout(cfg.train, cfg.scene);
  ToyNetwork net = make_network(train_scene.input_size(), r.layout, cfg.train);
  r.train = train(net, r.layout, train_scene, cfg.train, table, on_epoch);
  r.predictions = predict_scene(net, r.layout, test_scene, table);
  const auto points = cfg.scene.has_translation() ? std::vector<Eigen::Vector3d>{} : scene_template(cfg.scene);
  r.report = evaluate(cfg.scene.name(), r.predictions, cfg.specs, points);
  return r;
}

Json to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  Json specs = Json::array();
  for (const auto& s : cfg.specs) specs.push_back(to_json(s));
  return {{"scene", cfg.scene.name()},
          {"scheme", to_string(t.loss.scheme)},
          {"M", t.M},
          {"seed", t.seed},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"lr_decay", t.lr_decay},
          {"epsilon", t.loss.rwta.epsilon},
          {"selection", to_string(t.loss.rwta.selection)},
          {"v_strategy", to_string(t.strategy)},
          {"hidden", t.hidden},
          {"ewta_interval", t.ewta_interval},
          {"resample", t.resample},
          {"train_samples", cfg.train_samples},
          {"test_samples", cfg.test_samples},
          {"thresholds", specs}};
}

Json run_to_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  Json preds = Json::array();
  for (const auto& p : result.predictions) preds.push_back(to_json(p));
  return {{"format", "bingham-run"},
          {"version", 1},
          {"config", to_json(cfg)},
          {"train", {{"loss_trace", result.train.loss_trace}, {"clamp_events", result.train.clamp_events}}},
          {"metrics", to_json(result.report)},
          {"predictions", preds}};
}

}  // namespace bingham
