#include "bingham/normalizer.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <vector>

#include "bingham/quaternion.hpp"

namespace bingham {

namespace {

constexpr int kPanelOrder = 8;
// Panel breakpoints as fractions of pi/2, graded toward 0.
constexpr std::array<double, 9> kBreaks = {0.0,        1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16,
                                           1.0 / 8,    1.0 / 4,   1.0 / 2,  1.0};

struct AngleRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

AngleRule make_angle_rule() {
  using Rule = boost::math::quadrature::gauss<double, kPanelOrder>;
  const auto& abscissa = Rule::abscissa();
  const auto& weight = Rule::weights();
  AngleRule rule;
  for (std::size_t p = 0; p + 1 < kBreaks.size(); ++p) {
    const double a = 0.5 * kPi * kBreaks[p];
    const double b = 0.5 * kPi * kBreaks[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    // Boost stores the non-negative half of the symmetric rule.
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      rule.nodes.push_back(mid - half * abscissa[i]);
      rule.weights.push_back(half * weight[i]);
      if (abscissa[i] != 0.0) {
        rule.nodes.push_back(mid + half * abscissa[i]);
        rule.weights.push_back(half * weight[i]);
      }
    }
  }
  return rule;
}

// Product rule flattened to structure-of-arrays: for every node the measure
// weight (including the Jacobian sin^2(t1) sin(t2) and the 16-fold symmetry
// factor) and the squared coordinates x2^2, x3^2, x4^2.
struct ProductRule {
  std::vector<double> w, a, b, c;
};

const ProductRule& product_rule() {
  static const ProductRule rule = [] {
    const AngleRule r = make_angle_rule();
    ProductRule p;
    const std::size_t n = r.nodes.size();
    p.w.reserve(n * n * n);
    p.a.reserve(n * n * n);
    p.b.reserve(n * n * n);
    p.c.reserve(n * n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s1 = std::sin(r.nodes[i]);
      for (std::size_t j = 0; j < n; ++j) {
        const double s2 = std::sin(r.nodes[j]), c2 = std::cos(r.nodes[j]);
        for (std::size_t k = 0; k < n; ++k) {
          const double s3 = std::sin(r.nodes[k]), c3 = std::cos(r.nodes[k]);
          const double x2 = s1 * c2, x3 = s1 * s2 * c3, x4 = s1 * s2 * s3;
          p.w.push_back(16.0 * r.weights[i] * r.weights[j] * r.weights[k] * s1 * s1 * s2);
          p.a.push_back(x2 * x2);
          p.b.push_back(x3 * x3);
          p.c.push_back(x4 * x4);
        }
      }
    }
    return p;
  }();
  return rule;
}

}  // namespace

LogNormalizer log_normalizer_quadrature(const Eigen::Vector3d& lambda) {
  const ProductRule& r = product_rule();
  // F is symmetric in the concentrations; the graded rule wants them descending.
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lambda[a] > lambda[b]; });
  const double l1 = lambda[order[0]], l2 = lambda[order[1]], l3 = lambda[order[2]];
  double f = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  const std::size_t n = r.w.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = r.w[i] * std::exp(l1 * r.a[i] + l2 * r.b[i] + l3 * r.c[i]);
    f += e;
    m1 += e * r.a[i];
    m2 += e * r.b[i];
    m3 += e * r.c[i];
  }
  LogNormalizer out;
  out.log_F = std::log(f);
  out.grad[order[0]] = m1 / f;
  out.grad[order[1]] = m2 / f;
  out.grad[order[2]] = m3 / f;
  return out;
}

double log_F_quadrature(const Eigen::Vector3d& lambda) { return log_normalizer_quadrature(lambda).log_F; }

Eigen::Vector3d grad_log_F(const Eigen::Vector3d& lambda) { return log_normalizer_quadrature(lambda).grad; }

}  // namespace bingham
