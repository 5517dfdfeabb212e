#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bingham/mixture.hpp"
#include "bingham/quaternion.hpp"

namespace bingham {

struct RecallSpec {
  double rot_threshold_deg = 5.0;
  double trans_threshold_m = 0.1;

  void validate() const;
};

struct PosePoint {
  UnitQuaternion q;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

/// Fraction of pairs with rotation error below the angle threshold and
/// translation error below the distance threshold.
double recall(std::span<const PosePoint> predictions, std::span<const PosePoint> ground_truths,
              const RecallSpec& spec);

struct OracleResult {
  std::size_t index = 0;  // best hypothesis
  double rot_error = 0.0;
  double trans_error = 0.0;
};

/// Per sample, the hypothesis closest to the ground truth. Without a spec the
/// rotation error alone decides; with one, max(d_q / rot threshold,
/// d_t / trans threshold) does, so the chosen hypothesis is the one most
/// likely to fall inside the recall thresholds.
std::vector<OracleResult> oracle_error(const std::vector<std::vector<PosePoint>>& hypotheses,
                                       std::span<const PosePoint> ground_truths,
                                       const RecallSpec* spec = nullptr);
double oracle_recall(const std::vector<std::vector<PosePoint>>& hypotheses,
                     std::span<const PosePoint> ground_truths, const RecallSpec& spec);

/// Self-EMD: sum_i w_i d_q(mode_i, weighted mode).
double semd(std::span<const Vec4> modes, std::span<const double> weights);
double semd(const BinghamMixture& m);

/// 0.5 (mean_p min_q |p - q| + mean_q min_p |q - p|).
double chamfer(std::span<const Eigen::Vector3d> P, std::span<const Eigen::Vector3d> Q);

/// Fraction of all ground-truth modes that have a hypothesis within the
/// thresholds. rotation_only ignores translations.
double mode_detection_rate(const std::vector<std::vector<PosePoint>>& hypotheses,
                           const std::vector<std::vector<PosePoint>>& mode_sets,
                           const RecallSpec& spec, bool rotation_only);

struct PruningPoint {
  double fraction = 1.0;     // retained fraction
  std::size_t retained = 0;
  double mean_error = 0.0;
  double max_uncertainty = 0.0;
};

/// For each retained fraction f, the mean error of the ceil(f n) predictions
/// with the lowest uncertainty (ties by index).
std::vector<PruningPoint> pruning_curve(std::span<const double> errors,
                                        std::span<const double> uncertainties,
                                        std::span<const double> fractions);

struct ThresholdRow {
  double threshold = 0.0;
  std::size_t count = 0;
  double mean_error = 0.0;  // NaN when count is 0
};

/// Mean error of predictions whose uncertainty is at most each threshold.
std::vector<ThresholdRow> threshold_table(std::span<const double> errors,
                                          std::span<const double> uncertainties,
                                          std::span<const double> thresholds);

/// A held-out sample with its ground truth and the predicted hypotheses.
struct SamplePrediction {
  UnitQuaternion q;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::vector<UnitQuaternion> modes;
  std::vector<Eigen::Vector3d> mode_translations;
  bool corrupted = false;
  BinghamMixture mixture;
  std::optional<GaussianMixture> translation;
  std::vector<PoseHypothesis> hypotheses;  // weight descending
};

struct EvalReport {
  std::string scene;
  std::size_t samples = 0;
  std::vector<RecallSpec> specs;
  std::vector<double> recall;         // weighted mode, per spec
  std::vector<double> oracle_recall;  // per spec
  double median_rot_error_deg = 0.0;
  double median_trans_error_m = 0.0;
  double mean_rot_error_deg = 0.0;
  double mean_oracle_rot_error_deg = 0.0;
  double semd = 0.0;                  // mean over samples, radians
  double mode_detection_rate = 0.0;   // at mode_spec
  RecallSpec mode_spec;
  double chamfer_mean = 0.0;          // template under prediction vs truth
  double chamfer_median = 0.0;
  std::vector<PruningPoint> pruning;
  std::vector<ThresholdRow> thresholds;
};

/// Retained fractions 1.0, 0.9, ..., 0.1.
std::vector<double> default_fractions();

/// Full report. The weighted-mode rotation error is pruned by the weighted
/// component's uncertainty (combined uncertainty when translations exist).
/// The mode-detection spec uses 5 degrees and, for scenes with translation,
/// 10% of the ground-truth trajectory diameter. `points` is the template used
/// for the Chamfer statistics (skipped when empty).
EvalReport evaluate(const std::string& scene, const std::vector<SamplePrediction>& predictions,
                    const std::vector<RecallSpec>& specs, std::span<const Eigen::Vector3d> points);

}  // namespace bingham
