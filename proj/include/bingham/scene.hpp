#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bingham/quaternion.hpp"

namespace bingham {

/// Procedural scenes whose labels are multimodal by construction.
///
///   cyclic_k         template with k-fold symmetry about z, rotated by a random q
///   asymmetric       same as cyclic_1
///   ambiguous_views  camera pose inside a world of landmarks with a 2-fold
///                    symmetry about z; carries translation labels
///   mixed            cyclic_1 where every other sample gets noisy inputs
enum class SceneKind { Cyclic, Asymmetric, AmbiguousViews, Mixed };

struct SceneSpec {
  SceneKind kind = SceneKind::Cyclic;
  int k = 1;  // symmetry order for Cyclic

  std::string name() const;
  static SceneSpec parse(std::string_view name);
  int symmetry_order() const;
  bool has_translation() const { return kind == SceneKind::AmbiguousViews; }
};

struct SceneSample {
  Eigen::VectorXd input;
  UnitQuaternion q;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::vector<UnitQuaternion> modes;          // closed under the symmetry group
  std::vector<Eigen::Vector3d> mode_translations;
  bool corrupted = false;
};

struct SyntheticScene {
  SceneSpec spec;
  std::vector<SceneSample> samples;

  std::size_t input_size() const { return samples.empty() ? 0 : samples.front().input.size(); }
};

/// Noise level of the corrupted half of the mixed scene.
inline constexpr double kMixedNoise = 0.35;

/// Template points (object frame for cyclic kinds, world landmarks for
/// ambiguous_views).
std::vector<Eigen::Vector3d> scene_template(const SceneSpec& spec);

/// Symmetry rotations of the scene (k rotations about z, identity first).
std::vector<UnitQuaternion> symmetry_group(const SceneSpec& spec);

/// Points sorted lexicographically by (x, y, z) and flattened.
Eigen::VectorXd sorted_features(std::vector<Eigen::Vector3d> points);

/// Deterministic for a given (spec, n, seed).
SyntheticScene generate_scene(const SceneSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace bingham
