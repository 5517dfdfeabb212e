#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bingham/error.hpp"
#include "bingham/metrics.hpp"
#include "bingham/orientation.hpp"
#include "oracles.hpp"

using namespace bingham;

namespace {

UnitQuaternion about_z(double deg) { return UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), deg2rad(deg)); }

PosePoint pose(double deg, double tx = 0.0) { return {about_z(deg), Eigen::Vector3d(tx, 0, 0)}; }

}  // namespace

TEST_CASE("recall examples") {
  std::mt19937_64 rng(1);
  std::vector<PosePoint> gt;
  for (int i = 0; i < 10; ++i) gt.push_back({random_rotation(rng), Eigen::Vector3d(i, 0, 0)});
  CHECK(recall(gt, gt, RecallSpec{}) == 1.0);
  CHECK_THROWS_AS(recall(std::vector<PosePoint>{}, std::vector<PosePoint>{}, RecallSpec{}), Error);
  try {
    recall(std::vector<PosePoint>{}, std::vector<PosePoint>{}, RecallSpec{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
  // Two of four inside 10 deg / 0.1 m: one fails on rotation, one on translation.
  const std::vector<PosePoint> pred = {pose(3), pose(12), pose(0, 0.05), pose(0, 0.2)};
  const std::vector<PosePoint> truth = {pose(0), pose(0), pose(0), pose(0)};
  CHECK(recall(pred, truth, RecallSpec{10.0, 0.1}) == 0.5);
  CHECK_THROWS_AS(recall(pred, truth, RecallSpec{0.0, 0.1}), Error);
}

TEST_CASE("recall is monotone in both thresholds") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> deg(0.0, 40.0), m(0.0, 0.5);
  std::vector<PosePoint> pred, truth;
  for (int i = 0; i < 200; ++i) {
    pred.push_back(pose(deg(rng), m(rng)));
    truth.push_back(pose(0));
  }
  double prev_r = 0.0;
  for (double r = 1.0; r <= 40.0; r += 3.0) {
    double prev_t = 0.0;
    for (double t = 0.01; t <= 0.5; t += 0.05) {
      const double v = recall(pred, truth, RecallSpec{r, t});
      CHECK(v >= prev_t);
      prev_t = v;
    }
    const double v = recall(pred, truth, RecallSpec{r, 0.3});
    CHECK(v >= prev_r);
    prev_r = v;
  }
}

TEST_CASE("oracle error") {
  const std::vector<PosePoint> truth = {pose(0)};
  const std::vector<std::vector<PosePoint>> single = {{pose(20)}};
  const auto one = oracle_error(single, truth);
  CHECK(rad2deg(one[0].rot_error) == doctest::Approx(20.0));
  CHECK(one[0].index == 0);
  const std::vector<std::vector<PosePoint>> hyps = {{pose(20), pose(-7), pose(90)}};
  const auto best = oracle_error(hyps, truth);
  CHECK(best[0].index == 1);
  CHECK(rad2deg(best[0].rot_error) == doctest::Approx(7.0));
  // With a spec the scalarization trades rotation against translation.
  const std::vector<std::vector<PosePoint>> mixed = {{pose(2, 0.5), pose(6, 0.01)}};
  const RecallSpec spec{10.0, 0.1};
  CHECK(oracle_error(mixed, truth)[0].index == 0);
  CHECK(oracle_error(mixed, truth, &spec)[0].index == 1);
  CHECK(oracle_recall(mixed, truth, spec) == 1.0);
}

TEST_CASE("oracle error never exceeds the weighted-mode error and shrinks with more hypotheses") {
  std::mt19937_64 rng(3);
  std::vector<PosePoint> truth;
  std::vector<std::vector<PosePoint>> hyps;
  for (int i = 0; i < 200; ++i) {
    truth.push_back({random_rotation(rng), Eigen::Vector3d::Zero()});
    std::vector<PosePoint> h;
    for (int k = 0; k < 4; ++k) h.push_back({random_rotation(rng), Eigen::Vector3d::Zero()});
    hyps.push_back(h);
  }
  auto before = oracle_error(hyps, truth);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(before[i].rot_error <= geodesic_distance(hyps[i][0].q, truth[i].q) + 1e-15);
    hyps[i].push_back({random_rotation(rng), Eigen::Vector3d::Zero()});
  }
  const auto after = oracle_error(hyps, truth);
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(after[i].rot_error <= before[i].rot_error);
}

TEST_CASE("semd examples") {
  const Vec4 a = about_z(0).coeffs(), b = about_z(90).coeffs();
  CHECK(semd(std::vector<Vec4>{a}, std::vector<double>{1.0}) == 0.0);
  CHECK(semd(std::vector<Vec4>{a, a, a}, std::vector<double>{0.2, 0.5, 0.3}) == 0.0);
  CHECK(semd(std::vector<Vec4>{a, b}, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.25 * kPi));
  const Vec4 c = about_z(40).coeffs();
  const std::vector<double> w = {0.2, 0.5, 0.3};
  const double s = semd(std::vector<Vec4>{a, b, c}, w);
  CHECK(semd(std::vector<Vec4>{c, a, b}, std::vector<double>{0.3, 0.2, 0.5}) == doctest::Approx(s));
  CHECK(semd(BinghamMixture()) == 0.0);
  CHECK_THROWS_AS(semd(std::vector<Vec4>{a}, std::vector<double>{}), Error);
}

TEST_CASE("chamfer examples and invariances") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<Eigen::Vector3d> P, Q;
  for (int i = 0; i < 30; ++i) P.push_back({n(rng), n(rng), n(rng)});
  for (int i = 0; i < 20; ++i) Q.push_back({n(rng), n(rng), n(rng)});
  CHECK(chamfer(P, P) == 0.0);
  std::vector<Eigen::Vector3d> PP = P;
  PP.insert(PP.end(), P.begin(), P.end());
  CHECK(chamfer(P, PP) == 0.0);
  CHECK(chamfer(std::vector<Eigen::Vector3d>{{0, 0, 0}}, std::vector<Eigen::Vector3d>{{1, 0, 0}}) == 1.0);
  CHECK(chamfer(P, Q) == doctest::Approx(chamfer(Q, P)).epsilon(1e-15));
  const auto R = random_rotation(rng);
  const Eigen::Vector3d t(0.3, -2.0, 1.1);
  std::vector<Eigen::Vector3d> P2, Q2;
  for (const auto& p : P) P2.push_back(R.rotate(p) + t);
  for (const auto& q : Q) Q2.push_back(R.rotate(q) + t);
  CHECK(std::abs(chamfer(P2, Q2) - chamfer(P, Q)) < 1e-9);
  CHECK_THROWS_AS(chamfer(P, std::vector<Eigen::Vector3d>{}), Error);
}

TEST_CASE("mode detection rate") {
  const std::vector<std::vector<PosePoint>> modes = {{pose(0), pose(90), pose(180), pose(270)}};
  CHECK(mode_detection_rate(modes, modes, RecallSpec{5.0, 0.1}, false) == 1.0);
  const std::vector<std::vector<PosePoint>> one = {{pose(1)}};
  CHECK(mode_detection_rate(one, modes, RecallSpec{5.0, 0.1}, false) <= 0.25);
  CHECK(mode_detection_rate(one, modes, RecallSpec{5.0, 0.1}, false) == 0.25);
  // Two hypotheses near two of the four modes of a cyclic_4 sample.
  const std::vector<std::vector<PosePoint>> two = {{pose(92), pose(268, 0.5)}};
  CHECK(mode_detection_rate(two, modes, RecallSpec{5.0, 0.1}, false) == 0.25);
  CHECK(mode_detection_rate(two, modes, RecallSpec{5.0, 0.1}, true) == 0.5);
}

TEST_CASE("pruning curve") {
  const std::vector<double> err = {5.0, 1.0, 3.0, 2.0, 4.0};
  const auto fr = default_fractions();
  REQUIRE(fr.size() == 10);
  CHECK(fr.front() == 1.0);
  CHECK(fr.back() == doctest::Approx(0.1));
  const auto exact = pruning_curve(err, err, fr);
  for (std::size_t i = 1; i < exact.size(); ++i) CHECK(exact[i].mean_error <= exact[i - 1].mean_error);
  CHECK(exact[0].mean_error == 3.0);
  CHECK(exact[0].retained == 5);
  CHECK(exact.back().retained == 1);
  CHECK(exact.back().mean_error == 1.0);
  const std::vector<double> flat(5, 0.7);
  for (const auto& p : pruning_curve(err, flat, std::vector<double>{1.0})) CHECK(p.mean_error == 3.0);
  // Constant uncertainty keeps index order; ceil(0.5 * 5) = 3 retained.
  const auto half = pruning_curve(err, flat, std::vector<double>{0.5});
  CHECK(half[0].retained == 3);
  CHECK(half[0].mean_error == 3.0);
  CHECK_THROWS_AS(pruning_curve(err, flat, std::vector<double>{1.5}), Error);

  // Uninformative uncertainty gives a flat curve up to sampling noise.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> e(20000), r(20000);
  for (auto& x : e) x = u(rng);
  for (auto& x : r) x = u(rng);
  for (const auto& p : pruning_curve(e, r, fr)) {
    const double se = std::sqrt(1.0 / 12.0 / static_cast<double>(p.retained));
    CHECK(std::abs(p.mean_error - 0.5) < 4.0 * se);
  }
}

TEST_CASE("threshold table") {
  const std::vector<double> err = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> unc = {0.1, 0.4, 0.2, 0.9};
  const auto rows = threshold_table(err, unc, std::vector<double>{0.05, 0.2, 0.5, 1.0});
  CHECK(rows[0].count == 0);
  CHECK(std::isnan(rows[0].mean_error));
  CHECK(rows[1].count == 2);
  CHECK(rows[1].mean_error == 2.0);
  CHECK(rows[2].count == 3);
  CHECK(rows[3].mean_error == 2.5);
}

TEST_CASE("evaluate on perfect predictions") {
  std::vector<SamplePrediction> preds;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    SamplePrediction p;
    p.q = random_rotation(rng);
    p.modes = {p.q};
    p.mode_translations = {Eigen::Vector3d::Zero()};
    const BinghamDistribution d(birdal_V(p.q.coeffs()), Eigen::Vector3d(-50, -60, -70));
    p.mixture = BinghamMixture({d}, {1.0});
    PoseHypothesis h;
    h.rotation = p.q;
    h.uncertainty = d.uncertainty();
    p.hypotheses = {h};
    preds.push_back(p);
  }
  const std::vector<Eigen::Vector3d> pts = {{1, 0, 0}, {0, 2, 0}};
  const EvalReport r = evaluate("cyclic_1", preds, {RecallSpec{5, 0.1}, RecallSpec{10, 0.2}}, pts);
  CHECK(r.samples == 20);
  CHECK(r.recall == std::vector<double>{1.0, 1.0});
  CHECK(r.oracle_recall == std::vector<double>{1.0, 1.0});
  CHECK(r.median_rot_error_deg < 1e-6);
  CHECK(r.semd == 0.0);
  CHECK(r.mode_detection_rate == 1.0);
  CHECK(r.chamfer_mean < 1e-9);
  CHECK(r.pruning.size() == 10);
  CHECK_THROWS_AS(evaluate("x", {}, {RecallSpec{}}, pts), Error);
}
