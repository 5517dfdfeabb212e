#include "bingham/losses.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "bingham/error.hpp"

namespace bingham {

namespace {

constexpr double kClipLow = 1e-12;
constexpr double kClipHigh = 1.0 - 1e-12;

double component_log_pdf(const Vec4& q, const DecodedComponent& c) {
  const Vec4 p = c.V.transpose() * q;
  return c.lambda[0] * p[1] * p[1] + c.lambda[1] * p[2] * p[2] + c.lambda[2] * p[3] * p[3] -
         c.norm.log_F;
}

Eigen::VectorXd softmax_of(const std::vector<double>& a) {
  return softmax(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
}

double log_sum_exp(const std::vector<double>& a) {
  const double top = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (double x : a) s += std::exp(x - top);
  return top + std::log(s);
}

std::vector<double> relaxed_weights(std::size_t M, std::size_t winner, double epsilon) {
  if (M == 1) return {1.0};
  std::vector<double> pi(M, epsilon / static_cast<double>(M - 1));
  pi[winner] = 1.0 - epsilon;
  return pi;
}

LossValue finish(const HeadLayout& layout, std::span<const double> raw, const DecodedHead& head,
                 double value, const ParamGrad& g) {
  LossValue out;
  out.value = value;
  out.grad.assign(layout.size(), 0.0);
  head_backward(layout, raw, head, g, out.grad);
  return out;
}

Vec4 normalized_or_throw(const Vec4& raw, double* norm) {
  *norm = raw.norm();
  if (!(*norm > 1e-12)) throw Error(ErrorCode::ZeroNorm, "prediction has zero norm");
  return raw / *norm;
}

// d/draw of f(raw / |raw|) given d/dq_hat.
Vec4 normalize_backward(const Vec4& q_hat, double norm, const Vec4& grad) {
  return (grad - q_hat * q_hat.dot(grad)) / norm;
}

}  // namespace

void RwtaConfig::validate(std::size_t M) const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  }
  if (ewta_k < 1 || ewta_k > M) throw Error(ErrorCode::InvalidArgument, "ewta_k must lie in [1, M]");
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Ubn: return "ubn";
    case Scheme::MbnCe: return "mbn-ce";
    case Scheme::Mbn: return "mbn";
    case Scheme::MbOnly: return "mb-only";
    case Scheme::Wta: return "wta";
    case Scheme::Ewta: return "ewta";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::Ubn, Scheme::MbnCe, Scheme::Mbn, Scheme::MbOnly, Scheme::Wta, Scheme::Ewta}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(Selection s) { return s == Selection::L1 ? "l1" : "probability"; }

Selection parse_selection(std::string_view name) {
  if (name == "l1") return Selection::L1;
  if (name == "probability") return Selection::Probability;
  throw Error(ErrorCode::InvalidArgument, "unknown selection '" + std::string(name) + "'");
}

std::size_t ewta_k_schedule(std::size_t M, std::size_t epoch, std::size_t interval) {
  std::size_t k = M;
  if (interval == 0) return 1;
  for (std::size_t e = interval; e <= epoch && k > 1; e += interval) k = std::max<std::size_t>(1, k / 2);
  return k;
}

double bingham_nll_term(const Vec4& q, const DecodedHead& head, std::size_t k, double scale,
                        ParamGrad& grad) {
  const auto& c = head.components[k];
  const Vec4 p = c.V.transpose() * q;
  double quad = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double pi = p[i + 1];
    quad += c.lambda[i] * pi * pi;
    grad.lambda[k][i] += scale * (c.norm.grad[i] - pi * pi);
    grad.V[k].col(i + 1) += scale * (-2.0 * c.lambda[i] * pi) * q;
  }
  return c.norm.log_F - quad;
}

double mixture_nll_term(const Vec4& q, const DecodedHead& head, double scale, ParamGrad& grad) {
  const std::size_t M = head.components.size();
  std::vector<double> a(M);
  for (std::size_t k = 0; k < M; ++k) {
    a[k] = std::log(std::max(head.weights[k], kWeightFloor)) + component_log_pdf(q, head.components[k]);
  }
  const Eigen::VectorXd r = softmax_of(a);
  for (std::size_t k = 0; k < M; ++k) {
    bingham_nll_term(q, head, k, scale * r[k], grad);
    if (head.weights[k] > kWeightFloor) grad.weights[k] -= scale * r[k] / head.weights[k];
  }
  return -log_sum_exp(a);
}

std::size_t select_branch(const Vec4& q, const DecodedHead& head, Selection selection) {
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t k = 0; k < head.components.size(); ++k) {
    const auto& c = head.components[k];
    const double score = selection == Selection::L1 ? quaternion_l1(q, c.V.col(0))
                                                    : -component_log_pdf(q, c);
    if (k == 0 || score < best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

std::size_t select_branch(const Vec4& q, const BinghamMixture& m, Selection selection) {
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double score = selection == Selection::L1 ? quaternion_l1(q, m.component(k).mode_vector())
                                                    : -m.component(k).log_pdf(q);
    if (k == 0 || score < best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

std::vector<double> rwta_weights(const Vec4& q, const DecodedHead& head, const RwtaConfig& cfg) {
  const std::size_t M = head.components.size();
  if (M == 1) return {1.0};
  if (cfg.variant == WtaVariant::Ewta) {
    std::vector<double> score(M);
    for (std::size_t k = 0; k < M; ++k) {
      const auto& c = head.components[k];
      score[k] = cfg.selection == Selection::L1 ? quaternion_l1(q, c.V.col(0)) : -component_log_pdf(q, c);
    }
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    const std::size_t k = std::clamp<std::size_t>(cfg.ewta_k, 1, M);
    std::vector<double> pi(M, 0.0);
    for (std::size_t i = 0; i < k; ++i) pi[order[i]] = 1.0 / static_cast<double>(k);
    return pi;
  }
  const std::size_t winner = select_branch(q, head, cfg.selection);
  if (cfg.variant == WtaVariant::Wta) {
    std::vector<double> pi(M, 0.0);
    pi[winner] = 1.0;
    return pi;
  }
  return relaxed_weights(M, winner, cfg.epsilon);
}

double rwta_term(const Vec4& q, const DecodedHead& head, const RwtaConfig& cfg, double scale,
                 ParamGrad& grad) {
  const std::vector<double> pi = rwta_weights(q, head, cfg);
  double value = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (pi[k] == 0.0) continue;
    value += pi[k] * bingham_nll_term(q, head, k, scale * pi[k], grad);
  }
  return value;
}

double cross_entropy_value(std::span<const double> w, std::size_t i_star) {
  double value = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wk = std::clamp(w[k], kClipLow, kClipHigh);
    value -= k == i_star ? std::log(wk) : std::log1p(-wk);
  }
  return value;
}

double cross_entropy_term(const DecodedHead& head, std::size_t i_star, double scale, ParamGrad& grad) {
  const auto& w = head.weights;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w[k] <= kClipLow || w[k] >= kClipHigh) continue;
    grad.weights[k] += scale * (static_cast<std::size_t>(k) == i_star ? -1.0 / w[k] : 1.0 / (1.0 - w[k]));
  }
  return cross_entropy_value(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), i_star);
}

double gaussian_nll_term(const Eigen::Vector3d& t, const DecodedHead& head, std::size_t k,
                         double scale, ParamGrad& grad) {
  const GaussianComponent& g = head.components[k].gaussian;
  const Eigen::Vector3d d = t - g.mean;
  for (int i = 0; i < 3; ++i) {
    grad.mean[k][i] -= scale * d[i] / g.sigma2[i];
    grad.sigma2[k][i] += scale * 0.5 * (1.0 / g.sigma2[i] - d[i] * d[i] / (g.sigma2[i] * g.sigma2[i]));
  }
  return -gaussian_log_pdf(g, t);
}

double gaussian_mixture_nll_term(const Eigen::Vector3d& t, const DecodedHead& head, double scale,
                                 ParamGrad& grad) {
  const std::size_t M = head.components.size();
  std::vector<double> a(M);
  for (std::size_t k = 0; k < M; ++k) {
    a[k] = std::log(std::max(head.weights[k], kWeightFloor)) + gaussian_log_pdf(head.components[k].gaussian, t);
  }
  const Eigen::VectorXd r = softmax_of(a);
  for (std::size_t k = 0; k < M; ++k) {
    gaussian_nll_term(t, head, k, scale * r[k], grad);
    if (head.weights[k] > kWeightFloor) grad.weights[k] -= scale * r[k] / head.weights[k];
  }
  return -log_sum_exp(a);
}

double gaussian_rwta_term(const Eigen::Vector3d& t, const DecodedHead& head, std::size_t i_star,
                          double epsilon, double scale, ParamGrad& grad) {
  const std::vector<double> pi = relaxed_weights(head.components.size(), i_star, epsilon);
  double value = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (pi[k] == 0.0) continue;
    value += pi[k] * gaussian_nll_term(t, head, k, scale * pi[k], grad);
  }
  return value;
}

LossValue bingham_nll(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                      const NormalizationTable* table) {
  const DecodedHead head = decode_head(layout, raw, table);
  ParamGrad g(layout.M);
  const double v = bingham_nll_term(q, head, 0, 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue mixture_bingham_nll(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                              const NormalizationTable* table) {
  const DecodedHead head = decode_head(layout, raw, table);
  ParamGrad g(layout.M);
  const double v = mixture_nll_term(q, head, 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue rwta_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                    const RwtaConfig& cfg, const NormalizationTable* table) {
  const DecodedHead head = decode_head(layout, raw, table);
  ParamGrad g(layout.M);
  const double v = rwta_term(q, head, cfg, 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue mbn_ce_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                      const RwtaConfig& cfg, const NormalizationTable* table) {
  const DecodedHead head = decode_head(layout, raw, table);
  ParamGrad g(layout.M);
  double v = rwta_term(q, head, cfg, 1.0, g);
  v += cross_entropy_term(head, select_branch(q, head, cfg.selection), 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue mbn_mb_rwta_loss(const HeadLayout& layout, std::span<const double> raw, const Vec4& q,
                           const RwtaConfig& cfg, const NormalizationTable* table) {
  const DecodedHead head = decode_head(layout, raw, table);
  ParamGrad g(layout.M);
  double v = mixture_nll_term(q, head, 1.0, g);
  v += rwta_term(q, head, cfg, 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue gaussian_nll(const HeadLayout& layout, std::span<const double> raw,
                       const Eigen::Vector3d& t) {
  if (!layout.translation) throw Error(ErrorCode::InvalidArgument, "layout has no translation head");
  const DecodedHead head = decode_head(layout, raw, nullptr);
  ParamGrad g(layout.M);
  const double v = layout.M == 1 ? gaussian_nll_term(t, head, 0, 1.0, g)
                                 : gaussian_mixture_nll_term(t, head, 1.0, g);
  return finish(layout, raw, head, v, g);
}

LossValue cross_entropy_weights(const Eigen::VectorXd& logits, std::size_t i_star) {
  if (i_star >= static_cast<std::size_t>(logits.size())) {
    throw Error(ErrorCode::InvalidArgument, "winner index out of range");
  }
  DecodedHead head;
  head.weights = softmax(logits);
  head.components.resize(static_cast<std::size_t>(logits.size()));
  ParamGrad g(head.components.size());
  LossValue out;
  out.value = cross_entropy_term(head, i_star, 1.0, g);
  const Eigen::VectorXd d = softmax_backward(head.weights, g.weights);
  out.grad.assign(d.data(), d.data() + d.size());
  return out;
}

LossValue scheme_loss(const HeadLayout& layout, std::span<const double> raw, const LossTarget& target,
                      const LossConfig& cfg, const NormalizationTable* table, LossDiagnostics* diag) {
  const DecodedHead head = decode_head(layout, raw, table);
  if (diag) diag->clamp_events += head.clamp_events;
  ParamGrad g(layout.M);
  const Vec4& q = target.q;
  RwtaConfig rc = cfg.rwta;
  rc.variant = cfg.scheme == Scheme::Wta ? WtaVariant::Wta
               : cfg.scheme == Scheme::Ewta ? WtaVariant::Ewta
                                            : WtaVariant::Rwta;
  double v = 0.0;
  std::size_t winner = 0;
  if (target.rotation) {
    winner = select_branch(q, head, rc.selection);
    switch (cfg.scheme) {
      case Scheme::Ubn:
        v += bingham_nll_term(q, head, 0, 1.0, g);
        break;
      case Scheme::MbnCe:
        v += rwta_term(q, head, rc, 1.0, g);
        v += cross_entropy_term(head, winner, 1.0, g);
        break;
      case Scheme::Mbn:
      case Scheme::Wta:
      case Scheme::Ewta:
        v += mixture_nll_term(q, head, 1.0, g);
        v += rwta_term(q, head, rc, 1.0, g);
        break;
      case Scheme::MbOnly:
        v += mixture_nll_term(q, head, 1.0, g);
        break;
    }
  }
  if (target.translation && target.t && layout.translation) {
    const Eigen::Vector3d& t = *target.t;
    if (cfg.scheme == Scheme::Ubn) {
      v += gaussian_nll_term(t, head, 0, 1.0, g);
    } else {
      if (!target.rotation) {
        double best = 0.0;
        for (std::size_t k = 0; k < layout.M; ++k) {
          const double d = (head.components[k].gaussian.mean - t).norm();
          if (k == 0 || d < best) {
            best = d;
            winner = k;
          }
        }
      }
      const double eps = cfg.scheme == Scheme::Wta ? 0.0 : rc.epsilon;
      if (cfg.scheme != Scheme::MbOnly) v += gaussian_rwta_term(t, head, winner, eps, 1.0, g);
      if (cfg.scheme == Scheme::MbnCe) {
        if (!target.rotation) v += cross_entropy_term(head, winner, 1.0, g);
      } else {
        v += gaussian_mixture_nll_term(t, head, 1.0, g);
      }
    }
  }
  return finish(layout, raw, head, v, g);
}

LossValue l1_loss(const Vec4& q, const Vec4& q_hat_raw) {
  double n = 0.0;
  const Vec4 qh = normalized_or_throw(q_hat_raw, &n);
  const double plus = (q - qh).lpNorm<1>(), minus = (q + qh).lpNorm<1>();
  const double s = plus <= minus ? 1.0 : -1.0;
  const Vec4 d = q - s * qh;
  Vec4 g;
  for (int i = 0; i < 4; ++i) g[i] = -s * (d[i] > 0.0 ? 1.0 : d[i] < 0.0 ? -1.0 : 0.0);
  const Vec4 gr = normalize_backward(qh, n, g);
  return {std::min(plus, minus), {gr[0], gr[1], gr[2], gr[3]}};
}

LossValue cosine_loss(const Vec4& q, const Vec4& q_hat_raw) {
  double n = 0.0;
  const Vec4 qh = normalized_or_throw(q_hat_raw, &n);
  const double d = q.dot(qh);
  const Vec4 gr = normalize_backward(qh, n, -(d >= 0.0 ? 1.0 : -1.0) * q);
  return {1.0 - std::abs(d), {gr[0], gr[1], gr[2], gr[3]}};
}

LossValue point_loss(const Vec4& q, const Vec4& q_hat_raw, std::span<const Eigen::Vector3d> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "point loss needs points");
  double n = 0.0;
  const Vec4 qh = normalized_or_throw(q_hat_raw, &n);
  const Eigen::Matrix3d R = UnitQuaternion::canonicalize(q).rotation_matrix();
  const double w = qh[0];
  const Eigen::Vector3d v = qh.tail<3>();
  // Unnormalized rotation formula, valid since qh has unit norm.
  auto rotate = [&](const Eigen::Vector3d& x) {
    return ((w * w - v.squaredNorm()) * x + 2.0 * v.dot(x) * v + 2.0 * w * v.cross(x)).eval();
  };
  double value = 0.0;
  Vec4 g = Vec4::Zero();
  for (const auto& x : points) {
    const Eigen::Vector3d diff = R * x - rotate(x);
    const double len = diff.norm();
    value += len;
    if (len <= 0.0) continue;
    const Eigen::Vector3d u = diff / len;
    // Columns: d rotate(x) / d (w, v1, v2, v3).
    Eigen::Matrix<double, 3, 4> J;
    J.col(0) = 2.0 * w * x + 2.0 * v.cross(x);
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector3d e = Eigen::Vector3d::Unit(j);
      J.col(j + 1) = -2.0 * v[j] * x + 2.0 * x[j] * v + 2.0 * v.dot(x) * e + 2.0 * w * e.cross(x);
    }
    g -= J.transpose() * u;
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  const Vec4 gr = normalize_backward(qh, n, g * inv);
  return {value * inv, {gr[0], gr[1], gr[2], gr[3]}};
}

}  // namespace bingham
