#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <random>

#include "bingham/error.hpp"
#include "bingham/orientation.hpp"
#include "oracles.hpp"

using namespace bingham;

namespace {

double ortho_error(const Eigen::Matrix4d& V) { return (V.transpose() * V - Eigen::Matrix4d::Identity()).norm(); }

std::vector<double> random_raw(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> r(n);
  for (auto& x : r) x = d(rng);
  return r;
}

}  // namespace

TEST_CASE("gram schmidt examples") {
  CHECK(gram_schmidt_V(Eigen::Matrix4d::Identity()) == Eigen::Matrix4d::Identity());
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = 2.0;
  CHECK((gram_schmidt_V(m) - Eigen::Matrix4d::Identity()).norm() < 1e-15);
}

TEST_CASE("gram schmidt rejects dependent columns") {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.col(2) = m.col(0) * 3.0;
  try {
    gram_schmidt_V(m);
    FAIL("expected DegenerateColumns");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateColumns);
  }
}

TEST_CASE("gram schmidt fixes orthonormal input") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix4d V = oracle::random_orthogonal(rng);
    CHECK((gram_schmidt_V(V) - V).norm() < 1e-12);
  }
}

TEST_CASE("birdal frame examples") {
  CHECK(birdal_V(Vec4(1, 0, 0, 0)) == Eigen::Vector4d(1, 1, 1, -1).asDiagonal().toDenseMatrix());
  const Eigen::Matrix4d V = birdal_V(Vec4(0, 1, 0, 0));
  CHECK(V.col(0) == Eigen::Vector4d(0, 1, 0, 0));
  CHECK(ortho_error(V) < 1e-15);
}

TEST_CASE("cayley examples") {
  CHECK(cayley_V(Vec4::Zero()) == Eigen::Matrix4d::Identity());
  const Vec4 q(0.3, -0.7, 0.2, 0.5);
  CHECK((cayley_V(q) - cayley_V(2.0 * q)).norm() > 1e-3);
  CHECK((cayley_skew(q) + cayley_skew(q).transpose()).norm() == 0.0);
}

TEST_CASE("all constructions are orthonormal on 10^4 random inputs") {
  std::mt19937_64 rng(17);
  double gs = 0, bd = 0, cy = 0, first = 0, det = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto m = random_raw(rng, 16);
    gs = std::max(gs, ortho_error(build_V(VStrategy::GramSchmidt, m)));
    const auto r = random_raw(rng, 4);
    const Vec4 q = Vec4(r[0], r[1], r[2], r[3]).normalized();
    const Eigen::Matrix4d B = birdal_V(q);
    bd = std::max(bd, ortho_error(B));
    first = std::max(first, (B.col(0) - q).cwiseAbs().maxCoeff());
    const Eigen::Matrix4d C = cayley_V(Vec4(r[0], r[1], r[2], r[3]));
    cy = std::max(cy, ortho_error(C));
    det = std::max(det, std::abs(C.determinant() - 1.0));
  }
  CHECK(gs < 1e-9);
  CHECK(bd < 1e-12);
  CHECK(first == 0.0);
  CHECK(cy < 1e-10);
  CHECK(det < 1e-10);
}

TEST_CASE("lambda from raw examples") {
  const double l2 = std::log(2.0);
  const Eigen::Vector3d a = lambda_from_raw(Eigen::Vector3d::Zero());
  CHECK((a - Eigen::Vector3d(-l2, -2 * l2, -3 * l2)).norm() < 1e-15);
  const Eigen::Vector3d b = lambda_from_raw(Eigen::Vector3d::Constant(-50.0));
  CHECK(b.cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::Vector3d c = lambda_from_raw(Eigen::Vector3d::Ones());
  CHECK(c[0] == doctest::Approx(-1.3132616875).epsilon(1e-9));
  CHECK(c[1] == doctest::Approx(-2.6265233750).epsilon(1e-9));
  CHECK(c[2] == doctest::Approx(-3.9397850625).epsilon(1e-9));
}

TEST_CASE("lambda from raw is ordered and finite for extreme inputs") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10000; ++i) {
    const auto r = random_raw(rng, 3, 200.0);
    const Eigen::Vector3d l = lambda_from_raw(Eigen::Vector3d(r[0], r[1], r[2]));
    CHECK(l.allFinite());
    CHECK(0.0 >= l[0]);
    CHECK(l[0] >= l[1]);
    CHECK(l[1] >= l[2]);
  }
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("strategy names round trip") {
  for (auto s : {VStrategy::GramSchmidt, VStrategy::Birdal, VStrategy::Cayley}) {
    CHECK(parse_v_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_v_strategy("euler"), Error);
  CHECK(v_raw_size(VStrategy::GramSchmidt) == 16);
  CHECK(v_raw_size(VStrategy::Cayley) == 4);
}

TEST_CASE("V and lambda backward passes match finite differences") {
  std::mt19937_64 rng(23);
  for (auto s : {VStrategy::GramSchmidt, VStrategy::Birdal, VStrategy::Cayley}) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto raw = random_raw(rng, v_raw_size(s));
      Eigen::Matrix4d G;
      for (int i = 0; i < 16; ++i) G.data()[i] = std::normal_distribution<double>()(rng);
      auto f = [&](const std::vector<double>& x) { return build_V(s, x).cwiseProduct(G).sum(); };
      std::vector<double> analytic(raw.size(), 0.0);
      build_V_backward(s, raw, G, analytic);
      const auto c = oracle::compare_gradients(analytic, oracle::fd_gradient(f, raw));
      INFO(to_string(s), " ", c.detail);
      CHECK(c.ok);
    }
  }
  for (int trial = 0; trial < 30; ++trial) {
    const auto raw = random_raw(rng, 3, 2.0);
    const auto w = random_raw(rng, 3);
    auto f = [&](const std::vector<double>& x) {
      return lambda_from_raw(Eigen::Vector3d(x[0], x[1], x[2])).dot(Eigen::Vector3d(w[0], w[1], w[2]));
    };
    const Eigen::Vector3d g =
        lambda_from_raw_backward(Eigen::Vector3d(raw[0], raw[1], raw[2]), Eigen::Vector3d(w[0], w[1], w[2]));
    CHECK(oracle::compare_gradients({g[0], g[1], g[2]}, oracle::fd_gradient(f, raw)).ok);
  }
}

TEST_CASE("build_V validates slice sizes") {
  std::vector<double> four(4, 0.5);
  CHECK_THROWS_AS(build_V(VStrategy::GramSchmidt, four), Error);
  CHECK_THROWS_AS(build_V(VStrategy::Birdal, std::vector<double>(4, 0.0)), Error);
}
