#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bingham/head.hpp"
#include "bingham/quaternion.hpp"

namespace bingham {

/// Loss value with its gradient; the gradient is aligned with the raw input
/// the loss was evaluated on (a raw head, a logit vector, or a raw 4-vector).
struct LossValue {
  double value = 0.0;
  std::vector<double> grad;
};

enum class Selection { L1, Probability };
enum class WtaVariant { Wta, Rwta, Ewta };

struct RwtaConfig {
  double epsilon = 0.05;
  Selection selection = Selection::L1;
  WtaVariant variant = WtaVariant::Rwta;
  std::size_t ewta_k = 1;  // top-k for the Ewta variant

  void validate(std::size_t M) const;
};

/// Training objective on the rotation head.
///   ubn      Bingham NLL of a single component
///   mbn-ce   RWTA + cross-entropy on the weights
///   mbn      mixture NLL + RWTA
///   mb-only  mixture NLL
///   wta      mixture NLL + hard WTA
///   ewta     mixture NLL + evolving WTA
enum class Scheme { Ubn, MbnCe, Mbn, MbOnly, Wta, Ewta };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);
std::string_view to_string(Selection s);
Selection parse_selection(std::string_view name);

struct LossConfig {
  Scheme scheme = Scheme::Mbn;
  RwtaConfig rwta;
};

/// EWTA top-k at a given epoch: starts at M and halves every `interval`
/// epochs, never below 1.
std::size_t ewta_k_schedule(std::size_t M, std::size_t epoch, std::size_t interval);

// ---------------------------------------------------------------------------
// Parameter-level terms. Each returns the loss value and adds its gradient
// (scaled by `scale`) into `grad`.

/// log F - sum_i lambda_i (v_{i+1} . q)^2 for component k.
double bingham_nll_term(const Vec4& q, const DecodedHead& head, std::size_t k, double scale,
                        ParamGrad& grad);
/// -log sum_k w_k p_k(q), weights floored at kWeightFloor.
double mixture_nll_term(const Vec4& q, const DecodedHead& head, double scale, ParamGrad& grad);
/// sum_k pi_k nll_k with the branch weights pi held constant.
double rwta_term(const Vec4& q, const DecodedHead& head, const RwtaConfig& cfg, double scale,
                 ParamGrad& grad);
/// Binary cross-entropy of the clipped weights against one-hot(i_star).
double cross_entropy_term(const DecodedHead& head, std::size_t i_star, double scale, ParamGrad& grad);
double gaussian_nll_term(const Eigen::Vector3d& t, const DecodedHead& head, std::size_t k,
                         double scale, ParamGrad& grad);
double gaussian_mixture_nll_term(const Eigen::Vector3d& t, const DecodedHead& head, double scale,
                                 ParamGrad& grad);
/// RWTA over Gaussian components with a given winner.
double gaussian_rwta_term(const Eigen::Vector3d& t, const DecodedHead& head, std::size_t i_star,
                          double epsilon, double scale, ParamGrad& grad);

/// l1: argmin of quaternion_l1(q, mode_k). probability: argmax of log p_k(q).
/// Ties resolve to the lowest index.
std::size_t select_branch(const Vec4& q, const DecodedHead& head, Selection selection);
std::size_t select_branch(const Vec4& q, const BinghamMixture& m, Selection selection);

/// Relaxed winner-takes-all branch weights for the given winner.
std::vector<double> rwta_weights(const Vec4& q, const DecodedHead& head, const RwtaConfig& cfg);

// ---------------------------------------------------------------------------
// Raw-head losses. table == nullptr falls back to the quadrature oracle.

LossValue bingham_nll(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                      const NormalizationTable* table);
LossValue mixture_bingham_nll(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                              const NormalizationTable* table);
LossValue rwta_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                    const RwtaConfig& cfg, const NormalizationTable* table);
LossValue mbn_ce_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                      const RwtaConfig& cfg, const NormalizationTable* table);
LossValue mbn_mb_rwta_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                           const RwtaConfig& cfg, const NormalizationTable* table);
/// Gaussian NLL of component 0 (M = 1) or of the whole mixture (M > 1).
LossValue gaussian_nll(const HeadLayout& layout, std::span<const double> raw,
                       const Eigen::Vector3d& t);

/// Cross-entropy on post-softmax weights; the gradient is w.r.t. the logits.
LossValue cross_entropy_weights(const Eigen::VectorXd& logits, std::size_t i_star);
/// Value only, on weights already in (0, 1).
double cross_entropy_value(std::span<const double> w, std::size_t i_star);

/// Which loss terms a training step evaluates.
struct LossTarget {
  UnitQuaternion q;
  std::optional<Eigen::Vector3d> t;
  bool rotation = true;
  bool translation = false;
};

struct LossDiagnostics {
  std::size_t clamp_events = 0;
};

/// The configured scheme on the rotation head, plus the translation terms when
/// requested: Gaussian NLL for ubn, otherwise mixture NLL and RWTA with the
/// winner chosen by rotation (or by translation distance when only the
/// translation is trained).
LossValue scheme_loss(const HeadLayout& layout, std::span<const double> raw, const LossTarget& target,
                      const LossConfig& cfg, const NormalizationTable* table,
                      LossDiagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Reference baselines on a raw 4-vector q_hat (normalized inside).

/// min(|q - q_hat|_1, |q + q_hat|_1).
LossValue l1_loss(const Vec4& q, const Vec4& q_hat_raw);
/// 1 - |q . q_hat|.
LossValue cosine_loss(const Vec4& q, const Vec4& q_hat_raw);
/// Mean over points of |R(q) x - R(q_hat) x|.
LossValue point_loss(const Vec4& q, const Vec4& q_hat_raw, std::span<const Eigen::Vector3d> points);

}  // namespace bingham
