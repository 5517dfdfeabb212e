#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bingham/normalizer.hpp"

namespace bingham {

struct AxisSpec {
  double min = -100.0;
  double max = 0.0;
  std::uint32_t count = 32;
};

/// Grid over (l1, l2, l3). Nodes along an axis are spaced uniformly in
/// s = 1 - log1p((max - l) / c) / log1p((max - min) / c) with c = 1, which puts
/// them densely near max (= 0 for Bingham tables) and sparsely at large |l|.
struct GridSpec {
  std::array<AxisSpec, 3> axes;

  static GridSpec cube(double min, double max, std::uint32_t count);
  void validate() const;
};

inline constexpr double kGridScale = 1.0;

/// Precomputed log F over a GridSpec with smooth interpolation.
///
/// Interpolation is tricubic (Catmull-Rom) over the node index coordinate of
/// each axis, with ghost nodes by quadratic extrapolation at the borders. The
/// returned gradient is the exact derivative of the interpolant, so values and
/// gradients used in training are mutually consistent.
///
/// Binary layout (little endian): "BNGT", u32 version, 3 x {f64 min, f64 max,
/// u32 count}, then count1*count2*count3 f64 log F values, l1 slowest.
class NormalizationTable {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Evaluates the quadrature oracle at every node. When all three axes are
  /// identical only the sorted node triples are integrated and the rest are
  /// filled by permutation symmetry of F. Deterministic for any thread count.
  static NormalizationTable build(const GridSpec& grid, unsigned threads = 1);

  static NormalizationTable load(const std::filesystem::path& path);
  static NormalizationTable deserialize(std::span<const std::byte> bytes);
  void save(const std::filesystem::path& path) const;
  std::vector<std::byte> serialize() const;

  const GridSpec& grid() const { return grid_; }
  double node(int axis, std::uint32_t index) const;
  double value(std::uint32_t i, std::uint32_t j, std::uint32_t k) const;
  std::span<const double> values() const { return values_; }

  bool contains(const Eigen::Vector3d& lambda) const;

  /// Throws Error(OutOfRange) when lambda is outside the grid.
  LogNormalizer interpolate(const Eigen::Vector3d& lambda) const;

  /// Clamps each coordinate into the grid; clamped coordinates get a zero
  /// gradient component and are flagged in `clamped` when provided.
  LogNormalizer interpolate_clamped(const Eigen::Vector3d& lambda,
                                    std::array<bool, 3>* clamped = nullptr) const;

 private:
  NormalizationTable(GridSpec grid, std::vector<double> values);
  void build_padded();

  double position(int axis, double lambda, double* dpos_dlambda) const;
  LogNormalizer eval(const Eigen::Vector3d& lambda) const;

  GridSpec grid_;
  std::vector<double> values_;
  // (n1 + 2) x (n2 + 2) x (n3 + 2) copy of values_ with ghost layers.
  std::vector<double> padded_;
};

}  // namespace bingham
