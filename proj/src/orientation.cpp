#include "bingham/orientation.hpp"

#include <Eigen/LU>
#include <cmath>

#include "bingham/error.hpp"

namespace bingham {

namespace {

constexpr double kDegenerateResidual = 1e-8;

Vec4 to_vec4(std::span<const double> raw) { return Vec4(raw[0], raw[1], raw[2], raw[3]); }

void check_size(VStrategy s, std::size_t raw, std::size_t grad) {
  if (raw != v_raw_size(s) || grad != v_raw_size(s)) {
    throw Error(ErrorCode::ShapeMismatch, "raw slice does not match V strategy size");
  }
}

// dS/dq_j as (row, col, sign) triples; the transposed entries carry -sign.
struct SkewEntry {
  int row, col, q;
  double sign;
};
constexpr SkewEntry kSkewUpper[] = {
    {0, 1, 0, -1.0}, {0, 2, 3, 1.0},  {0, 3, 2, -1.0},
    {1, 2, 2, 1.0},  {1, 3, 1, 1.0},  {2, 3, 0, -1.0},
};

}  // namespace

std::string_view to_string(VStrategy s) {
  switch (s) {
    case VStrategy::GramSchmidt: return "gram_schmidt";
    case VStrategy::Birdal: return "birdal";
    case VStrategy::Cayley: return "cayley";
  }
  return "birdal";
}

VStrategy parse_v_strategy(std::string_view name) {
  if (name == "gram_schmidt") return VStrategy::GramSchmidt;
  if (name == "birdal") return VStrategy::Birdal;
  if (name == "cayley") return VStrategy::Cayley;
  throw Error(ErrorCode::InvalidArgument, "unknown V strategy '" + std::string(name) + "'");
}

std::size_t v_raw_size(VStrategy s) { return s == VStrategy::GramSchmidt ? 16 : 4; }

Eigen::Matrix4d gram_schmidt_V(const Eigen::Matrix4d& m) {
  Eigen::Matrix4d v;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d r = m.col(i);
    for (int k = 0; k < i; ++k) r -= v.col(k).dot(m.col(i)) * v.col(k);
    const double n = r.norm();
    if (!(n > kDegenerateResidual)) {
      throw Error(ErrorCode::DegenerateColumns,
                  "Gram-Schmidt residual of column " + std::to_string(i) + " vanished");
    }
    v.col(i) = r / n;
  }
  return v;
}

Eigen::Matrix4d birdal_V(const Vec4& q) {
  const double a = q[0], b = q[1], c = q[2], d = q[3];
  Eigen::Matrix4d v;
  v << a, -b, -c, d,
       b, a, d, c,
       c, -d, a, -b,
       d, c, -b, -a;
  return v;
}

Eigen::Matrix4d cayley_skew(const Vec4& q) {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  for (const auto& e : kSkewUpper) {
    s(e.row, e.col) = e.sign * q[e.q];
    s(e.col, e.row) = -e.sign * q[e.q];
  }
  return s;
}

Eigen::Matrix4d cayley_V(const Vec4& q) {
  const Eigen::Matrix4d s = cayley_skew(q);
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  return (id - s).partialPivLu().solve(id + s);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::Vector3d lambda_from_raw(const Eigen::Vector3d& o) {
  const double s1 = softplus(o[0]), s2 = softplus(o[1]), s3 = softplus(o[2]);
  return Eigen::Vector3d(-s1, -s1 - s2, -s1 - s2 - s3);
}

Eigen::Vector3d lambda_from_raw_backward(const Eigen::Vector3d& o,
                                         const Eigen::Vector3d& grad_lambda) {
  // d lambda_j / d o_k = -sigmoid(o_k) for k <= j.
  const double tail3 = grad_lambda[2];
  const double tail2 = grad_lambda[1] + tail3;
  const double tail1 = grad_lambda[0] + tail2;
  return Eigen::Vector3d(-sigmoid(o[0]) * tail1, -sigmoid(o[1]) * tail2, -sigmoid(o[2]) * tail3);
}

Eigen::Matrix4d build_V(VStrategy s, std::span<const double> raw) {
  if (raw.size() != v_raw_size(s)) {
    throw Error(ErrorCode::ShapeMismatch, "raw slice does not match V strategy size");
  }
  switch (s) {
    case VStrategy::GramSchmidt:
      return gram_schmidt_V(Eigen::Map<const Eigen::Matrix4d>(raw.data()));
    case VStrategy::Birdal: {
      const Vec4 r = to_vec4(raw);
      const double n = r.norm();
      if (!(n > 1e-12)) throw Error(ErrorCode::ZeroNorm, "Birdal raw quaternion has zero norm");
      return birdal_V(r / n);
    }
    case VStrategy::Cayley:
      return cayley_V(to_vec4(raw));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown V strategy");
}

void build_V_backward(VStrategy s, std::span<const double> raw, const Eigen::Matrix4d& grad_V,
                      std::span<double> grad_raw) {
  check_size(s, raw.size(), grad_raw.size());
  switch (s) {
    case VStrategy::Birdal: {
      const Vec4 r = to_vec4(raw);
      const double n = r.norm();
      const Vec4 q = r / n;
      // V is linear in q: V(q) = sum_j q_j V(e_j).
      Vec4 gq;
      for (int j = 0; j < 4; ++j) gq[j] = grad_V.cwiseProduct(birdal_V(Vec4::Unit(j))).sum();
      const Vec4 g = (gq - q * q.dot(gq)) / n;
      for (int j = 0; j < 4; ++j) grad_raw[j] += g[j];
      return;
    }
    case VStrategy::Cayley: {
      const Vec4 q = to_vec4(raw);
      const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
      const Eigen::Matrix4d s_mat = cayley_skew(q);
      const Eigen::Matrix4d a = (id - s_mat).inverse();
      const Eigen::Matrix4d v = a * (id + s_mat);
      // dV = A dS (V + I)  =>  dL/dS = A^T G (V + I)^T
      const Eigen::Matrix4d gs = a.transpose() * grad_V * (v + id).transpose();
      for (const auto& e : kSkewUpper) {
        grad_raw[e.q] += e.sign * (gs(e.row, e.col) - gs(e.col, e.row));
      }
      return;
    }
    case VStrategy::GramSchmidt: {
      const Eigen::Map<const Eigen::Matrix4d> m(raw.data());
      // Replay the forward sweep, keeping projections and residual norms.
      Eigen::Matrix4d v;
      Eigen::Matrix4d coef = Eigen::Matrix4d::Zero();  // coef(k, i) = <v_k, m_i>
      Eigen::Vector4d norms;
      for (int i = 0; i < 4; ++i) {
        Eigen::Vector4d r = m.col(i);
        for (int k = 0; k < i; ++k) {
          coef(k, i) = v.col(k).dot(m.col(i));
          r -= coef(k, i) * v.col(k);
        }
        norms[i] = r.norm();
        v.col(i) = r / norms[i];
      }
      Eigen::Matrix4d gv = grad_V;
      Eigen::Matrix4d gm = Eigen::Matrix4d::Zero();
      for (int i = 3; i >= 0; --i) {
        const Eigen::Vector4d vi = v.col(i);
        const Eigen::Vector4d gr = (gv.col(i) - vi * vi.dot(gv.col(i))) / norms[i];
        gm.col(i) += gr;
        for (int k = 0; k < i; ++k) {
          const double gc = -v.col(k).dot(gr);
          gm.col(i) += gc * v.col(k);
          gv.col(k) += gc * m.col(i) - coef(k, i) * gr;
        }
      }
      for (int j = 0; j < 16; ++j) grad_raw[j] += gm.data()[j];
      return;
    }
  }
}

}  // namespace bingham
