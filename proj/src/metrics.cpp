#include "bingham/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bingham/error.hpp"

namespace bingham {

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::ShapeMismatch, "prediction and ground-truth counts differ");
  if (a == 0) throw Error(ErrorCode::EmptyInput, "no samples");
}

bool inside(const PosePoint& p, const PosePoint& g, const RecallSpec& spec, bool rotation_only) {
  if (geodesic_distance(p.q, g.q) >= deg2rad(spec.rot_threshold_deg)) return false;
  return rotation_only || (p.t - g.t).norm() < spec.trans_threshold_m;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void RecallSpec::validate() const {
  if (!(rot_threshold_deg > 0.0) || !(trans_threshold_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "thresholds must be positive");
  }
}

double recall(std::span<const PosePoint> predictions, std::span<const PosePoint> ground_truths,
              const RecallSpec& spec) {
  require_same_size(predictions.size(), ground_truths.size());
  spec.validate();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    hits += inside(predictions[i], ground_truths[i], spec, false) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<OracleResult> oracle_error(const std::vector<std::vector<PosePoint>>& hypotheses,
                                       std::span<const PosePoint> ground_truths,
                                       const RecallSpec* spec) {
  require_same_size(hypotheses.size(), ground_truths.size());
  std::vector<OracleResult> out;
  out.reserve(hypotheses.size());
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (hypotheses[i].empty()) throw Error(ErrorCode::EmptyInput, "sample without hypotheses");
    OracleResult best;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < hypotheses[i].size(); ++h) {
      const double dq = geodesic_distance(hypotheses[i][h].q, ground_truths[i].q);
      const double dt = (hypotheses[i][h].t - ground_truths[i].t).norm();
      const double score =
          spec ? std::max(dq / deg2rad(spec->rot_threshold_deg), dt / spec->trans_threshold_m) : dq;
      if (score < best_score) {
        best_score = score;
        best = {h, dq, dt};
      }
    }
    out.push_back(best);
  }
  return out;
}

double oracle_recall(const std::vector<std::vector<PosePoint>>& hypotheses,
                     std::span<const PosePoint> ground_truths, const RecallSpec& spec) {
  spec.validate();
  const auto best = oracle_error(hypotheses, ground_truths, &spec);
  std::vector<PosePoint> chosen;
  chosen.reserve(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) chosen.push_back(hypotheses[i][best[i].index]);
  return recall(chosen, ground_truths, spec);
}

double semd(std::span<const Vec4> modes, std::span<const double> weights) {
  if (modes.size() != weights.size()) throw Error(ErrorCode::ShapeMismatch, "modes and weights differ");
  if (modes.empty()) throw Error(ErrorCode::EmptyInput, "no modes");
  const std::size_t ref =
      static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
  double total = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    total += weights[i] * geodesic_distance(modes[i], modes[ref]);
  }
  return total;
}

double semd(const BinghamMixture& m) {
  std::vector<Vec4> modes;
  for (const auto& c : m.components()) modes.push_back(c.mode_vector());
  return semd(modes, m.weights());
}

double chamfer(std::span<const Eigen::Vector3d> P, std::span<const Eigen::Vector3d> Q) {
  if (P.empty() || Q.empty()) throw Error(ErrorCode::EmptyInput, "empty point set");
  auto one_way = [](std::span<const Eigen::Vector3d> A, std::span<const Eigen::Vector3d> B) {
    double sum = 0.0;
    for (const auto& a : A) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : B) best = std::min(best, (a - b).squaredNorm());
      sum += std::sqrt(best);
    }
    return sum / static_cast<double>(A.size());
  };
  return 0.5 * (one_way(P, Q) + one_way(Q, P));
}

double mode_detection_rate(const std::vector<std::vector<PosePoint>>& hypotheses,
                           const std::vector<std::vector<PosePoint>>& mode_sets,
                           const RecallSpec& spec, bool rotation_only) {
  require_same_size(hypotheses.size(), mode_sets.size());
  spec.validate();
  std::size_t found = 0, total = 0;
  for (std::size_t i = 0; i < mode_sets.size(); ++i) {
    for (const auto& mode : mode_sets[i]) {
      ++total;
      for (const auto& h : hypotheses[i]) {
        if (inside(h, mode, spec, rotation_only)) {
          ++found;
          break;
        }
      }
    }
  }
  if (total == 0) throw Error(ErrorCode::EmptyInput, "no ground-truth modes");
  return static_cast<double>(found) / static_cast<double>(total);
}

std::vector<PruningPoint> pruning_curve(std::span<const double> errors,
                                        std::span<const double> uncertainties,
                                        std::span<const double> fractions) {
  require_same_size(errors.size(), uncertainties.size());
  std::vector<std::size_t> order(errors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return uncertainties[a] < uncertainties[b]; });
  std::vector<PruningPoint> out;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fraction outside (0, 1]");
    PruningPoint p;
    p.fraction = f;
    p.retained = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(f * static_cast<double>(errors.size()) - 1e-9)));
    double sum = 0.0;
    for (std::size_t i = 0; i < p.retained; ++i) sum += errors[order[i]];
    p.mean_error = sum / static_cast<double>(p.retained);
    p.max_uncertainty = uncertainties[order[p.retained - 1]];
    out.push_back(p);
  }
  return out;
}

std::vector<ThresholdRow> threshold_table(std::span<const double> errors,
                                          std::span<const double> uncertainties,
                                          std::span<const double> thresholds) {
  require_same_size(errors.size(), uncertainties.size());
  std::vector<ThresholdRow> out;
  for (double th : thresholds) {
    ThresholdRow row;
    row.threshold = th;
    double sum = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (uncertainties[i] <= th) {
        ++row.count;
        sum += errors[i];
      }
    }
    row.mean_error = row.count ? sum / static_cast<double>(row.count)
                               : std::numeric_limits<double>::quiet_NaN();
    out.push_back(row);
  }
  return out;
}

std::vector<double> default_fractions() {
  std::vector<double> f;
  for (int i = 10; i >= 1; --i) f.push_back(i / 10.0);
  return f;
}

EvalReport evaluate(const std::string& scene, const std::vector<SamplePrediction>& predictions,
                    const std::vector<RecallSpec>& specs, std::span<const Eigen::Vector3d> points) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to evaluate");
  EvalReport r;
  r.scene = scene;
  r.samples = predictions.size();
  r.specs = specs;
  const bool with_translation = predictions.front().translation.has_value();

  std::vector<PosePoint> best, truth;
  std::vector<std::vector<PosePoint>> hyps, modes;
  std::vector<double> rot_err, trans_err, unc, semds;
  for (const auto& p : predictions) {
    if (p.hypotheses.empty()) throw Error(ErrorCode::EmptyInput, "sample without hypotheses");
    const PoseHypothesis& top = p.hypotheses.front();
    best.push_back({top.rotation, top.translation});
    truth.push_back({p.q, p.t});
    std::vector<PosePoint> h;
    for (const auto& x : p.hypotheses) h.push_back({x.rotation, x.translation});
    hyps.push_back(std::move(h));
    std::vector<PosePoint> m;
    for (std::size_t j = 0; j < p.modes.size(); ++j) {
      m.push_back({p.modes[j], j < p.mode_translations.size() ? p.mode_translations[j]
                                                              : Eigen::Vector3d::Zero()});
    }
    modes.push_back(std::move(m));
    rot_err.push_back(rad2deg(geodesic_distance(top.rotation, p.q)));
    trans_err.push_back((top.translation - p.t).norm());
    unc.push_back(with_translation ? top.combined_uncertainty : top.uncertainty);
    semds.push_back(semd(p.mixture));
  }
  for (const auto& s : specs) {
    r.recall.push_back(recall(best, truth, s));
    r.oracle_recall.push_back(oracle_recall(hyps, truth, s));
  }
  r.median_rot_error_deg = median(rot_err);
  r.median_trans_error_m = median(trans_err);
  r.mean_rot_error_deg = mean(rot_err);
  std::vector<double> oracle_deg;
  for (const auto& o : oracle_error(hyps, truth)) oracle_deg.push_back(rad2deg(o.rot_error));
  r.mean_oracle_rot_error_deg = mean(oracle_deg);
  r.semd = mean(semds);

  r.mode_spec.rot_threshold_deg = 5.0;
  if (with_translation) {
    double diameter = 0.0;
    for (const auto& a : truth) {
      for (const auto& b : truth) diameter = std::max(diameter, (a.t - b.t).norm());
    }
    r.mode_spec.trans_threshold_m = std::max(0.1 * diameter, 1e-9);
  }
  r.mode_detection_rate = mode_detection_rate(hyps, modes, r.mode_spec, !with_translation);

  if (!points.empty() && !with_translation) {
    std::vector<double> cd;
    for (const auto& p : predictions) {
      std::vector<Eigen::Vector3d> a, b;
      for (const auto& x : points) {
        a.push_back(p.hypotheses.front().rotation.rotate(x));
        b.push_back(p.q.rotate(x));
      }
      cd.push_back(chamfer(a, b));
    }
    r.chamfer_mean = mean(cd);
    r.chamfer_median = median(cd);
  }

  const auto fractions = default_fractions();
  r.pruning = pruning_curve(rot_err, unc, fractions);
  std::vector<double> sorted_unc = unc;
  std::sort(sorted_unc.begin(), sorted_unc.end());
  std::vector<double> ths;
  for (int i = 1; i <= 10; ++i) {
    const std::size_t idx = std::min(sorted_unc.size() - 1, (sorted_unc.size() * i) / 10 - (i == 10 ? 1 : 0));
    ths.push_back(sorted_unc[idx]);
  }
  r.thresholds = threshold_table(rot_err, unc, ths);
  return r;
}

}  // namespace bingham
