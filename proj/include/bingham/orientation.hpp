#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>

#include "bingham/quaternion.hpp"

namespace bingham {

/// How the orthogonal orientation matrix V is produced from raw outputs.
enum class VStrategy { GramSchmidt, Birdal, Cayley };

std::string_view to_string(VStrategy s);
VStrategy parse_v_strategy(std::string_view name);

/// Number of raw values consumed by a strategy (16 for Gram-Schmidt, else 4).
std::size_t v_raw_size(VStrategy s);

/// Classical Gram-Schmidt over the columns of m. Throws
/// Error(DegenerateColumns) if a residual norm drops to 1e-8 or below.
Eigen::Matrix4d gram_schmidt_V(const Eigen::Matrix4d& m);

/// Frame bundle of a unit quaternion: first column is q, the other three are
/// the orthonormal complements given by the left-multiplication matrices.
Eigen::Matrix4d birdal_V(const Vec4& q);

/// Skew-symmetric generator used by the Cayley construction.
Eigen::Matrix4d cayley_skew(const Vec4& q);

/// V = (I - S)^-1 (I + S). q need not have unit norm.
Eigen::Matrix4d cayley_V(const Vec4& q);

double softplus(double x);
double sigmoid(double x);

/// lambda_k = -(softplus(o_1) + ... + softplus(o_k)); always 0 >= l1 >= l2 >= l3.
Eigen::Vector3d lambda_from_raw(const Eigen::Vector3d& o);

/// Vector-Jacobian product of lambda_from_raw.
Eigen::Vector3d lambda_from_raw_backward(const Eigen::Vector3d& o,
                                         const Eigen::Vector3d& grad_lambda);

/// Builds V from the strategy's raw slice. For Gram-Schmidt the 16 values are
/// the column-major entries of M; for Birdal the 4 values are normalized to a
/// quaternion first; Cayley uses them as-is.
Eigen::Matrix4d build_V(VStrategy s, std::span<const double> raw);

/// Accumulates dL/draw into grad_raw given dL/dV.
void build_V_backward(VStrategy s, std::span<const double> raw, const Eigen::Matrix4d& grad_V,
                      std::span<double> grad_raw);

}  // namespace bingham
