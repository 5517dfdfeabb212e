#include "bingham/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bingham/error.hpp"

namespace bingham {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || M == 0) {
    throw Error(ErrorCode::InvalidArgument, "epochs, batch size and M must be positive");
  }
  if (!(learning_rate > 0.0) || !(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive and decay in (0, 1]");
  }
  if (loss.scheme == Scheme::Ubn && M != 1) throw Error(ErrorCode::InvalidArgument, "ubn requires M = 1");
  if (loss.scheme != Scheme::Ubn) loss.rwta.validate(M);
  for (auto h : hidden) {
    if (h == 0) throw Error(ErrorCode::InvalidArgument, "hidden layer of width 0");
  }
}

HeadLayout make_layout(const TrainConfig& cfg, const SceneSpec& scene) {
  return {cfg.M, cfg.strategy, scene.has_translation()};
}

ToyNetwork make_network(std::size_t input_size, const HeadLayout& layout, const TrainConfig& cfg) {
  std::vector<std::size_t> sizes{input_size};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(layout.size());
  return ToyNetwork(sizes, cfg.seed);
}

TrainResult train(ToyNetwork& net, const HeadLayout& layout, const SyntheticScene& scene,
                  const TrainConfig& cfg, const NormalizationTable& table, const EpochCallback& on_epoch) {
  cfg.validate();
  if (scene.samples.empty()) throw Error(ErrorCode::EmptyInput, "scene has no samples");
  if (net.input_size() != scene.input_size() || net.output_size() != layout.size()) {
    throw Error(ErrorCode::ShapeMismatch, "network does not match scene or head layout");
  }
  const std::size_t n = scene.samples.size();
  const auto in = static_cast<Eigen::Index>(net.input_size());
  const auto out = static_cast<Eigen::Index>(layout.size());
  const bool staged = layout.translation && scene.spec.has_translation();
  const std::size_t ewta_interval =
      cfg.ewta_interval ? cfg.ewta_interval
                        : std::max<std::size_t>(1, cfg.epochs / (static_cast<std::size_t>(std::log2(cfg.M)) + 1));

  Adam adam(net.parameter_count(), cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(net.parameter_count());
  ToyNetwork::Cache cache;
  TrainResult result;
  LossDiagnostics diag;

  SyntheticScene fresh;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const SyntheticScene* data = &scene;
    if (cfg.resample && epoch > 0) {
      fresh = generate_scene(scene.spec, n, resample_seed(cfg.seed, epoch));
      data = &fresh;
    }
    adam.set_learning_rate(cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch)));
    LossConfig lc = cfg.loss;
    if (lc.scheme == Scheme::Ewta) lc.rwta.ewta_k = ewta_k_schedule(cfg.M, epoch, ewta_interval);
    bool rot = true, trans = staged;
    if (staged) {
      const double f = static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
      rot = f >= 0.4;
      trans = f < 0.4 || f >= 0.8;
    }
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t B = std::min(cfg.batch_size, n - start);
      Eigen::MatrixXd X(in, static_cast<Eigen::Index>(B));
      for (std::size_t b = 0; b < B; ++b) X.col(static_cast<Eigen::Index>(b)) = data->samples[order[start + b]].input;
      const Eigen::MatrixXd Y = net.forward(X, cache);
      if (!Y.allFinite()) {
        throw Error(ErrorCode::DivergenceDetected,
                    "non-finite network output at epoch " + std::to_string(epoch) + ", batch starting at " +
                        std::to_string(start));
      }
      Eigen::MatrixXd dY(out, static_cast<Eigen::Index>(B));
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const auto& s = data->samples[order[start + b]];
        const auto col = static_cast<Eigen::Index>(b);
        LossTarget target{s.q, staged ? std::optional<Eigen::Vector3d>(s.t) : std::nullopt, rot, trans};
        const std::span<const double> raw(Y.col(col).data(), layout.size());
        const LossValue lv = scheme_loss(layout, raw, target, lc, &table, &diag);
        if (!staged || (rot && trans)) {
          batch_loss += lv.value;
        } else {
          // The trace always reports the full objective so stages stay comparable.
          LossTarget full = target;
          full.rotation = full.translation = true;
          batch_loss += scheme_loss(layout, raw, full, lc, &table).value;
        }
        dY.col(col) = Eigen::Map<const Eigen::VectorXd>(lv.grad.data(), out) / static_cast<double>(B);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::DivergenceDetected,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                        std::to_string(start));
      }
      epoch_loss += batch_loss;
      net.backward(cache, dY, grad);
      adam.step(net.parameters(), grad);
    }
    epoch_loss /= static_cast<double>(n);
    result.loss_trace.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  result.clamp_events = diag.clamp_events;
  return result;
}

std::uint64_t resample_seed(std::uint64_t seed, std::size_t epoch) {
  // splitmix64 of (seed, epoch): well separated from the seed + 1 test stream.
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + epoch + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DecodedHead predict(const ToyNetwork& net, const HeadLayout& layout, const Eigen::VectorXd& input,
                    const NormalizationTable& table) {
  const Eigen::VectorXd y = net.forward(input);
  return decode_head(layout, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), &table);
}

namespace {

std::vector<PoseHypothesis> hypotheses_of(const DecodedHead& head, bool translation) {
  const std::size_t M = head.components.size();
  std::vector<PoseHypothesis> h(M);
  std::vector<double> rot_e(M), trans_e(M);
  for (std::size_t k = 0; k < M; ++k) {
    const BinghamDistribution d = head.distribution(k);
    h[k].rotation = d.mode();
    h[k].weight = head.weights[static_cast<Eigen::Index>(k)];
    h[k].rot_entropy = d.entropy();
    h[k].uncertainty = d.uncertainty();
    if (translation) {
      h[k].translation = head.components[k].gaussian.mean;
      h[k].trans_entropy = gaussian_entropy(head.components[k].gaussian);
    }
    rot_e[k] = h[k].rot_entropy;
    trans_e[k] = h[k].trans_entropy;
  }
  const auto combined = combined_uncertainty(rot_e, trans_e);
  for (std::size_t k = 0; k < M; ++k) h[k].combined_uncertainty = combined[k];
  std::stable_sort(h.begin(), h.end(), [](const PoseHypothesis& a, const PoseHypothesis& b) {
    return a.weight > b.weight;
  });
  return h;
}

}  // namespace

std::vector<PoseHypothesis> predict_hypotheses(const ToyNetwork& net, const HeadLayout& layout,
                                               const Eigen::VectorXd& input,
                                               const NormalizationTable& table) {
  return hypotheses_of(predict(net, layout, input, table), layout.translation);
}

std::vector<SamplePrediction> predict_scene(const ToyNetwork& net, const HeadLayout& layout,
                                            const SyntheticScene& scene,
                                            const NormalizationTable& table) {
  std::vector<SamplePrediction> out;
  out.reserve(scene.samples.size());
  for (const auto& s : scene.samples) {
    const DecodedHead head = predict(net, layout, s.input, table);
    SamplePrediction p;
    p.q = s.q;
    p.t = s.t;
    p.modes = s.modes;
    p.mode_translations = s.mode_translations;
    p.corrupted = s.corrupted;
    p.mixture = head.mixture();
    if (layout.translation) p.translation = head.gaussian_mixture();
    p.hypotheses = hypotheses_of(head, layout.translation);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace bingham
