#include <doctest.h>

#include <algorithm>
#include <map>

#include "bingham/error.hpp"
#include "bingham/scene.hpp"

using namespace bingham;

namespace {

// True if every point of A has a partner in B within tol (and sizes match).
bool same_set(const std::vector<Eigen::Vector3d>& A, const std::vector<Eigen::Vector3d>& B, double tol) {
  if (A.size() != B.size()) return false;
  for (const auto& a : A) {
    if (std::none_of(B.begin(), B.end(), [&](const Eigen::Vector3d& b) { return (a - b).norm() <= tol; })) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scene names") {
  for (const char* n : {"cyclic_1", "cyclic_4", "asymmetric", "ambiguous_views", "mixed"}) {
    CHECK(SceneSpec::parse(n).name() == n);
  }
  CHECK(SceneSpec::parse("cyclic_4").symmetry_order() == 4);
  CHECK(SceneSpec::parse("ambiguous_views").has_translation());
  CHECK_FALSE(SceneSpec::parse("mixed").has_translation());
  CHECK_THROWS_AS(SceneSpec::parse("cyclic_0"), Error);
  CHECK_THROWS_AS(SceneSpec::parse("cyclic_x"), Error);
  CHECK_THROWS_AS(SceneSpec::parse("torus"), Error);
}

TEST_CASE("cyclic templates are symmetric under their group") {
  for (int k : {1, 2, 3, 4, 6}) {
    const SceneSpec spec{SceneKind::Cyclic, k};
    const auto tmpl = scene_template(spec);
    CHECK(tmpl.size() == 3u * k);
    for (const auto& g : symmetry_group(spec)) {
      std::vector<Eigen::Vector3d> r;
      for (const auto& p : tmpl) r.push_back(g.rotate(p));
      CHECK(same_set(r, tmpl, 1e-12));
    }
  }
  const auto t4 = scene_template(SceneSpec{SceneKind::Cyclic, 4});
  std::vector<Eigen::Vector3d> r;
  const auto z90 = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), kPi / 2);
  for (const auto& p : t4) r.push_back(z90.rotate(p));
  CHECK(same_set(r, t4, 1e-12));
}

TEST_CASE("mode sets") {
  const auto one = generate_scene(SceneSpec::parse("cyclic_1"), 50, 1);
  for (const auto& s : one.samples) CHECK(s.modes.size() == 1);
  const auto two = generate_scene(SceneSpec::parse("cyclic_2"), 50, 2);
  const auto zpi = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), kPi);
  for (const auto& s : two.samples) {
    REQUIRE(s.modes.size() == 2);
    CHECK(s.modes[0] == s.q);
    CHECK(geodesic_distance(s.modes[1], compose(s.q, zpi)) < 1e-12);
    CHECK(rad2deg(geodesic_distance(s.modes[0], s.modes[1])) == doctest::Approx(180.0));
  }
  const auto four = generate_scene(SceneSpec::parse("cyclic_4"), 20, 3);
  for (const auto& s : four.samples) {
    CHECK(s.modes.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(geodesic_distance(s.modes[0], s.modes[i]) > 1.0);
  }
}

TEST_CASE("every mode explains the input") {
  for (const char* name : {"cyclic_4", "cyclic_3", "ambiguous_views"}) {
    const SceneSpec spec = SceneSpec::parse(name);
    const auto tmpl = scene_template(spec);
    for (const auto& s : generate_scene(spec, 20, 4).samples) {
      for (std::size_t m = 0; m < s.modes.size(); ++m) {
        std::vector<Eigen::Vector3d> pts;
        const Eigen::Matrix3d R = s.modes[m].rotation_matrix();
        for (const auto& p : tmpl) {
          pts.push_back(spec.has_translation() ? Eigen::Vector3d(R.transpose() * (p - s.mode_translations[m]))
                                               : Eigen::Vector3d(R * p));
        }
        CHECK((sorted_features(pts) - s.input).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("identical inputs have labels inside each other's mode sets") {
  // Poses that differ by a symmetry produce the same input.
  const SceneSpec spec = SceneSpec::parse("cyclic_4");
  const auto tmpl = scene_template(spec);
  const auto base = generate_scene(spec, 10, 5);
  for (const auto& s : base.samples) {
    for (const auto& g : symmetry_group(spec)) {
      const UnitQuaternion other = compose(s.q, g);
      std::vector<Eigen::Vector3d> pts;
      for (const auto& p : tmpl) pts.push_back(other.rotate(p));
      CHECK((sorted_features(pts) - s.input).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(std::any_of(s.modes.begin(), s.modes.end(),
                        [&](const UnitQuaternion& m) { return geodesic_distance(m, other) < 1e-9; }));
    }
  }
}

TEST_CASE("generation is deterministic") {
  for (const char* name : {"cyclic_4", "ambiguous_views", "mixed"}) {
    const auto a = generate_scene(SceneSpec::parse(name), 30, 9);
    const auto b = generate_scene(SceneSpec::parse(name), 30, 9);
    const auto c = generate_scene(SceneSpec::parse(name), 30, 10);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(a.samples[i].input == b.samples[i].input);
      CHECK(a.samples[i].q == b.samples[i].q);
    }
    CHECK_FALSE(a.samples[0].q == c.samples[0].q);
  }
}

TEST_CASE("mixed scene corrupts every other sample") {
  const auto mixed = generate_scene(SceneSpec::parse("mixed"), 400, 11);
  const auto tmpl = scene_template(SceneSpec::parse("mixed"));
  double noise2 = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mixed.samples.size(); ++i) {
    const auto& s = mixed.samples[i];
    CHECK(s.corrupted == (i % 2 == 1));
    CHECK(s.modes.size() == 1);
    std::vector<Eigen::Vector3d> pts;
    for (const auto& p : tmpl) pts.push_back(s.q.rotate(p));
    const Eigen::VectorXd clean = sorted_features(pts);
    if (!s.corrupted) {
      CHECK((clean - s.input).norm() < 1e-12);
    } else {
      noise2 += (clean - s.input).squaredNorm();
      count += static_cast<std::size_t>(clean.size());
    }
  }
  CHECK(std::sqrt(noise2 / count) == doctest::Approx(kMixedNoise).epsilon(0.05));
}

TEST_CASE("ambiguous views carry bounded translations") {
  const auto scene = generate_scene(SceneSpec::parse("ambiguous_views"), 200, 12);
  CHECK(scene.input_size() == 3 * 4 * 2);
  for (const auto& s : scene.samples) {
    CHECK(std::abs(s.t.x()) <= 1.0);
    CHECK(std::abs(s.t.y()) <= 1.0);
    CHECK(std::abs(s.t.z()) <= 0.5);
    REQUIRE(s.mode_translations.size() == 2);
    CHECK(s.mode_translations[0] == s.t);
    CHECK((s.mode_translations[1] - Eigen::Vector3d(-s.t.x(), -s.t.y(), s.t.z())).norm() < 1e-12);
  }
}

TEST_CASE("sorted features are order independent") {
  std::vector<Eigen::Vector3d> pts = {{1, 2, 3}, {0, 5, 1}, {1, -1, 0}, {0, 5, 0}};
  const Eigen::VectorXd f = sorted_features(pts);
  std::reverse(pts.begin(), pts.end());
  CHECK(sorted_features(pts) == f);
  CHECK(f.head<3>() == Eigen::Vector3d(0, 5, 0));
  CHECK(f.tail<3>() == Eigen::Vector3d(1, 2, 3));
}
