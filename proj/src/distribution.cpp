#include "bingham/distribution.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

#include "bingham/error.hpp"
#include "bingham/orientation.hpp"

namespace bingham {

BinghamDistribution::BinghamDistribution()
    : V_(Eigen::Matrix4d::Identity()), lambda_(Eigen::Vector3d::Zero()) {
  norm_.log_F = kLogSphereArea;
  norm_.grad = Eigen::Vector3d::Constant(0.25);
}

BinghamDistribution::BinghamDistribution(const Eigen::Matrix4d& V, const Eigen::Vector3d& lambda)
    : V_(V), lambda_(lambda) {
  validate();
  norm_ = log_normalizer_quadrature(lambda_);
}

BinghamDistribution::BinghamDistribution(const Eigen::Matrix4d& V, const Eigen::Vector3d& lambda,
                                         const LogNormalizer& normalizer)
    : V_(V), lambda_(lambda), norm_(normalizer) {
  validate();
}

void BinghamDistribution::validate() const {
  if (!V_.allFinite() || !lambda_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "Bingham parameters must be finite");
  }
  if ((V_.transpose() * V_ - Eigen::Matrix4d::Identity()).norm() > 1e-8) {
    throw Error(ErrorCode::InvalidArgument, "orientation matrix is not orthogonal");
  }
  constexpr double tol = 1e-12;
  if (lambda_[0] > tol || lambda_[1] > lambda_[0] + tol || lambda_[2] > lambda_[1] + tol) {
    throw Error(ErrorCode::InvalidArgument, "concentrations must satisfy 0 >= l1 >= l2 >= l3");
  }
}

double BinghamDistribution::quadratic_form(const Vec4& x) const {
  const Vec4 p = V_.transpose() * x;
  return lambda_[0] * p[1] * p[1] + lambda_[1] * p[2] * p[2] + lambda_[2] * p[3] * p[3];
}

double BinghamDistribution::pdf(const Vec4& x) const { return std::exp(log_pdf(x)); }

double BinghamDistribution::entropy() const { return norm_.log_F - lambda_.dot(norm_.grad); }

double BinghamDistribution::uncertainty() const { return sigmoid(entropy()); }

std::vector<UnitQuaternion> BinghamDistribution::sample(std::size_t n, std::uint64_t seed) const {
  // Envelope for exp(-z^T A z), A = diag(0, -l1, -l2, -l3) in the V frame:
  // ACG with Omega = I + 2A/b, where b solves sum_i 1 / (b + 2 a_i) = 1.
  const Eigen::Vector4d a(0.0, -lambda_[0], -lambda_[1], -lambda_[2]);
  auto excess = [&](double b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += 1.0 / (b + 2.0 * a[i]);
    return s - 1.0;
  };
  double b = 4.0;
  if (a.maxCoeff() > 0.0) {
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(excess, 1.0, 4.0, tol, iters);
    b = 0.5 * (root.first + root.second);
  }
  const Eigen::Vector4d omega = (Eigen::Vector4d::Ones() + 2.0 * a / b);
  const Eigen::Vector4d stddev = omega.cwiseInverse().cwiseSqrt();
  // log M* = -(q - b)/2 + (q/2) log(q/b), q = 4.
  const double log_bound = -0.5 * (4.0 - b) + 2.0 * std::log(4.0 / b);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<UnitQuaternion> out;
  out.reserve(n);
  while (out.size() < n) {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z[i] = stddev[i] * gauss(rng);
    const double zn = z.norm();
    if (!(zn > 0.0)) continue;
    z /= zn;
    const Eigen::Vector4d z2 = z.cwiseAbs2();
    const double log_ratio = -a.dot(z2) + 2.0 * std::log(omega.dot(z2)) - log_bound;
    if (std::log(unif(rng)) < log_ratio) out.push_back(UnitQuaternion::canonicalize(V_ * z));
  }
  return out;
}

Eigen::Matrix4d scatter_matrix(std::span<const Vec4> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  for (const auto& x : samples) s.noalias() += x * x.transpose();
  return s / static_cast<double>(samples.size());
}

BinghamDistribution fit_mle(std::span<const Vec4> samples, const FitOptions& options) {
  if (samples.size() < 4) throw Error(ErrorCode::EmptyInput, "fit needs at least 4 samples");
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(scatter_matrix(samples));
  // Eigen returns ascending eigenvalues; V wants them descending.
  Eigen::Matrix4d V;
  Eigen::Vector4d ev;
  for (int i = 0; i < 4; ++i) {
    V.col(i) = eig.eigenvectors().col(3 - i);
    ev[i] = eig.eigenvalues()[3 - i];
  }
  for (int i = 0; i < 3; ++i) {
    if (ev[i] - ev[i + 1] < 1e-9) {
      throw Error(ErrorCode::DegenerateScatter, "scatter matrix eigenvalues are not separated");
    }
  }
  const Eigen::Vector3d target = ev.tail<3>();

  // Concentrated-limit guess: E[(v^T x)^2] ~ 1 / (2 |l|).
  Eigen::Vector3d lambda;
  for (int i = 0; i < 3; ++i) {
    lambda[i] = target[i] >= 0.25 ? 0.0 : std::max(options.lambda_min, -0.5 / target[i] + 2.0);
    lambda[i] = std::min(lambda[i], 0.0);
  }

  auto residual = [&](const Eigen::Vector3d& lam, const Eigen::Vector3d& grad) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r = grad[i] - target[i];
      // A coordinate pinned at a bound is optimal if the moment pushes outward.
      if (lam[i] >= 0.0 && r <= 0.0) continue;
      if (lam[i] <= options.lambda_min && r >= 0.0) continue;
      worst = std::max(worst, std::abs(r));
    }
    return worst;
  };

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    if (residual(lambda, grad_log_F(lambda)) < options.moment_tolerance) break;
    for (int i = 0; i < 3; ++i) {
      auto moment_gap = [&](double li) {
        Eigen::Vector3d l = lambda;
        l[i] = li;
        return grad_log_F(l)[i] - target[i];
      };
      const double at_top = moment_gap(0.0);
      if (at_top <= 0.0) {
        lambda[i] = 0.0;
        continue;
      }
      const double at_bottom = moment_gap(options.lambda_min);
      if (at_bottom >= 0.0) {
        lambda[i] = options.lambda_min;
        continue;
      }
      boost::math::tools::eps_tolerance<double> tol(40);
      std::uintmax_t iters = 100;
      const auto root = boost::math::tools::toms748_solve(moment_gap, options.lambda_min, 0.0,
                                                          at_bottom, at_top, tol, iters);
      lambda[i] = 0.5 * (root.first + root.second);
    }
  }
  lambda[1] = std::min(lambda[1], lambda[0]);
  lambda[2] = std::min(lambda[2], lambda[1]);
  return BinghamDistribution(V, lambda);
}

}  // namespace bingham
