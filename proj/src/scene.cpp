#include "bingham/scene.hpp"

#include <algorithm>
#include <charconv>
#include <random>

#include "bingham/error.hpp"

namespace bingham {

namespace {

const std::vector<Eigen::Vector3d> kObjectMotif = {
    {1.0, 0.0, 0.3}, {0.6, 0.25, -0.4}, {0.8, -0.2, 0.7}};

const std::vector<Eigen::Vector3d> kWorldMotif = {
    {2.0, 0.5, 0.0}, {1.2, 1.5, 0.8}, {2.5, -1.0, 1.5}, {0.5, 2.2, -0.6}};

UnitQuaternion rot_z(double angle) { return UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), angle); }

}  // namespace

std::string SceneSpec::name() const {
  switch (kind) {
    case SceneKind::Cyclic: return "cyclic_" + std::to_string(k);
    case SceneKind::Asymmetric: return "asymmetric";
    case SceneKind::AmbiguousViews: return "ambiguous_views";
    case SceneKind::Mixed: return "mixed";
  }
  return "?";
}

SceneSpec SceneSpec::parse(std::string_view name) {
  if (name == "asymmetric") return {SceneKind::Asymmetric, 1};
  if (name == "ambiguous_views") return {SceneKind::AmbiguousViews, 2};
  if (name == "mixed") return {SceneKind::Mixed, 1};
  constexpr std::string_view prefix = "cyclic_";
  if (name.starts_with(prefix)) {
    int k = 0;
    const auto digits = name.substr(prefix.size());
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1 && k <= 64) {
      return {SceneKind::Cyclic, k};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scene '" + std::string(name) + "'");
}

int SceneSpec::symmetry_order() const {
  switch (kind) {
    case SceneKind::Cyclic: return k;
    case SceneKind::AmbiguousViews: return 2;
    default: return 1;
  }
}

std::vector<Eigen::Vector3d> scene_template(const SceneSpec& spec) {
  const auto& motif = spec.kind == SceneKind::AmbiguousViews ? kWorldMotif : kObjectMotif;
  const int k = spec.symmetry_order();
  std::vector<Eigen::Vector3d> pts;
  for (int j = 0; j < k; ++j) {
    const Eigen::Matrix3d R = rot_z(2.0 * kPi * j / k).rotation_matrix();
    for (const auto& p : motif) pts.push_back(R * p);
  }
  return pts;
}

std::vector<UnitQuaternion> symmetry_group(const SceneSpec& spec) {
  const int k = spec.symmetry_order();
  std::vector<UnitQuaternion> g;
  for (int j = 0; j < k; ++j) g.push_back(rot_z(2.0 * kPi * j / k));
  return g;
}

Eigen::VectorXd sorted_features(std::vector<Eigen::Vector3d> points) {
  std::sort(points.begin(), points.end(), [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  Eigen::VectorXd f(3 * points.size());
  for (std::size_t i = 0; i < points.size(); ++i) f.segment<3>(3 * i) = points[i];
  return f;
}

SyntheticScene generate_scene(const SceneSpec& spec, std::size_t n, std::uint64_t seed) {
  SyntheticScene scene;
  scene.spec = spec;
  const auto tmpl = scene_template(spec);
  const auto group = symmetry_group(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kMixedNoise);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  scene.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SceneSample s;
    s.q = random_rotation(rng);
    const Eigen::Matrix3d R = s.q.rotation_matrix();
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(tmpl.size());
    if (spec.kind == SceneKind::AmbiguousViews) {
      s.t = Eigen::Vector3d(unit(rng), unit(rng), 0.5 * unit(rng));
      // Landmarks in the camera frame; (g q, g t) sees the same set for g in the group.
      for (const auto& p : tmpl) pts.push_back(R.transpose() * (p - s.t));
      for (const auto& g : group) {
        s.modes.push_back(compose(g, s.q));
        s.mode_translations.push_back(g.rotate(s.t));
      }
    } else {
      for (const auto& p : tmpl) pts.push_back(R * p);
      for (const auto& g : group) {
        s.modes.push_back(compose(s.q, g));
        s.mode_translations.push_back(Eigen::Vector3d::Zero());
      }
    }
    s.input = sorted_features(std::move(pts));
    if (spec.kind == SceneKind::Mixed && i % 2 == 1) {
      s.corrupted = true;
      for (Eigen::Index j = 0; j < s.input.size(); ++j) s.input[j] += noise(rng);
    }
    scene.samples.push_back(std::move(s));
  }
  return scene;
}

}  // namespace bingham
