// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "bingham/distribution.hpp"
#include "bingham/experiment.hpp"
#include "bingham/metrics.hpp"
#include "bingham/mixture.hpp"
#include "bingham/normalizer.hpp"
#include "bingham/orientation.hpp"
#include "bingham/table.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

using namespace bingham;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets, pinned.
constexpr double kExactTol = 1e-8;
constexpr double kExactBudgetS = 1.0;
constexpr double kTableTol = 1e-3;
constexpr double kTableBudgetS = 300.0;
constexpr int kTablePoints = 1000;
constexpr int kSamplerCases = 20;
constexpr std::size_t kSamplerDraws = 100000;
constexpr double kMomentSigmas = 4.0;
constexpr double kFitLambdaRel = 0.05;
constexpr double kFitModeDeg = 1.0;
constexpr double kSamplerBudgetS = 120.0;
constexpr int kGradientPoints = 100;
constexpr double kGradientRtol = 1e-4;
constexpr double kGradientAtol = 1e-7;
constexpr double kMbnDetection = 0.90;
constexpr double kUbnDetection = 0.35;
constexpr double kModeCaptureBudgetS = 600.0;
constexpr int kPruningViolations = 1;

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << detail << std::endl;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

void normalization_exactness() {
  const auto t0 = Clock::now();
  const LogNormalizer n = log_normalizer_quadrature(Eigen::Vector3d::Zero());
  const double dt = seconds_since(t0);
  const double e_val = std::abs(n.log_F - std::log(2.0 * kPi * kPi));
  const double e_grad = (n.grad - Eigen::Vector3d::Constant(0.25)).cwiseAbs().maxCoeff();
  report(1, "normalization exactness", e_val <= kExactTol && e_grad <= kExactTol && dt < kExactBudgetS,
         fmt("|log F - log 2pi^2| = %.2e, max |grad - 1/4| = %.2e, %.3f s", e_val, e_grad, dt));
}

const NormalizationTable* table_fidelity() {
  auto t0 = Clock::now();
  static const NormalizationTable table = NormalizationTable::build(GridSpec::cube(-100.0, 0.0, 32), 1);
  const double build_s = seconds_since(t0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-100.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < kTablePoints; ++i) {
    Eigen::Vector3d l(u(rng), u(rng), u(rng));
    const double exact = log_F_quadrature(l);
    // Relative error in F is absolute error in log F.
    const double err = std::abs(table.interpolate(l).log_F - exact);
    worst = std::max(worst, err);
  }
  report(2, "table fidelity", worst <= kTableTol && build_s < kTableBudgetS,
         fmt("32^3 over [-100,0]^3 built in %.1f s; worst error %.2e over %d points", build_s, worst, kTablePoints));
  return &table;
}

void sampler_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-40.0, -2.0);
  double worst_sigma = 0.0, worst_rel = 0.0, worst_deg = 0.0;
  for (int c = 0; c < kSamplerCases; ++c) {
    Eigen::Vector3d l(u(rng), u(rng), u(rng));
    std::sort(l.data(), l.data() + 3, std::greater<>());
    const BinghamDistribution d(oracle::random_orthogonal(rng), l);
    std::vector<Vec4> xs;
    for (const auto& q : d.sample(kSamplerDraws, 100 + c)) xs.push_back(q.coeffs());
    const double n = static_cast<double>(xs.size());
    for (int i = 0; i < 3; ++i) {
      const Vec4 v = d.V().col(i + 1);
      double m = 0.0;
      for (const auto& x : xs) m += std::pow(v.dot(x), 2);
      m /= n;
      const double g = d.grad_log_F()[i];
      worst_sigma = std::max(worst_sigma, std::abs(m - g) / std::sqrt(g * (1.0 - g) / n));
    }
    const BinghamDistribution fit = fit_mle(xs);
    for (int i = 0; i < 3; ++i) worst_rel = std::max(worst_rel, std::abs(fit.lambda()[i] / l[i] - 1.0));
    worst_deg = std::max(worst_deg, rad2deg(geodesic_distance(fit.mode(), d.mode())));
  }
  const double dt = seconds_since(t0);
  report(3, "sampler/moment consistency",
         worst_sigma <= kMomentSigmas && worst_rel <= kFitLambdaRel && worst_deg <= kFitModeDeg &&
             dt < kSamplerBudgetS,
         fmt("worst moment deviation %.2f sigma, worst lambda error %.2f%%, worst mode error %.3f deg, %.1f s",
             worst_sigma, 100.0 * worst_rel, worst_deg, dt));
}

void gradient_suite_check(const NormalizationTable* table) {
  int cases = 0, failed = 0;
  std::string first;
  double worst = 0.0;
  std::uint64_t seed = 4000;
  for (const auto& c : gradient_suite::all_cases(table)) {
    const auto o = gradient_suite::run(c, kGradientPoints, seed++, kGradientRtol, kGradientAtol);
    ++cases;
    worst = std::max(worst, o.worst);
    if (o.passed != o.points) {
      ++failed;
      if (first.empty()) first = "; first failure " + o.name + " " + o.first_failure;
    }
  }
  report(4, "gradient suite", failed == 0,
         fmt("%d losses x %d points, %d failing, worst scaled deviation %.3g", cases, kGradientPoints, failed, worst) +
             first);
}

ExperimentConfig mode_capture_config(Scheme scheme, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scene = SceneSpec::parse("cyclic_4");
  cfg.train.loss.scheme = scheme;
  cfg.train.loss.rwta.selection = Selection::Probability;
  cfg.train.M = scheme == Scheme::Ubn ? 1 : 10;
  cfg.train.seed = seed;
  cfg.train.epochs = 50;
  cfg.train.resample = false;
  cfg.train_samples = 20000;
  return cfg;
}

bool finite_trace(const ExperimentResult& r) {
  return std::all_of(r.train.loss_trace.begin(), r.train.loss_trace.end(), [](double v) { return std::isfinite(v); });
}

void mode_capture_and_diversity(const NormalizationTable* table) {
  std::vector<ExperimentResult> mbn, mb_only;
  auto t0 = Clock::now();
  mbn.push_back(run_experiment(mode_capture_config(Scheme::Mbn, 1), *table));
  const ExperimentResult ubn = run_experiment(mode_capture_config(Scheme::Ubn, 1), *table);
  const double dt = seconds_since(t0);
  const double mbn_rate = mbn[0].report.mode_detection_rate, ubn_rate = ubn.report.mode_detection_rate;
  report(5, "mode capture", mbn_rate >= kMbnDetection && ubn_rate <= kUbnDetection && dt < kModeCaptureBudgetS,
         fmt("cyclic_4 detection at 5 deg: mbn M=10 %.4f, ubn %.4f (%.0f s)", mbn_rate, ubn_rate, dt));

  for (std::uint64_t seed : {2u, 3u}) mbn.push_back(run_experiment(mode_capture_config(Scheme::Mbn, seed), *table));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    mb_only.push_back(run_experiment(mode_capture_config(Scheme::MbOnly, seed), *table));
  }
  bool all_higher = true, finite = true;
  double mean_mbn = 0.0, mean_mb = 0.0;
  std::string per_seed;
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = mbn[i].report.semd, b = mb_only[i].report.semd;
    all_higher = all_higher && a > b;
    finite = finite && finite_trace(mbn[i]) && finite_trace(mb_only[i]);
    mean_mbn += a / 3.0;
    mean_mb += b / 3.0;
    per_seed += fmt("%sseed %zu %.4f vs %.4f", i ? ", " : "", i + 1, a, b);
  }
  report(6, "diversity", all_higher && mean_mbn > mean_mb && finite,
         fmt("mean SEMD mbn %.4f vs mb-only %.4f (", mean_mbn, mean_mb) + per_seed +
             (finite ? "), all losses finite" : "), non-finite loss seen"));
}

void uncertainty_error(const NormalizationTable* table) {
  ExperimentConfig cfg;
  cfg.scene = SceneSpec::parse("mixed");
  cfg.train.loss.scheme = Scheme::Ubn;
  cfg.train.loss.rwta.selection = Selection::Probability;
  cfg.train.M = 1;
  cfg.train.epochs = 500;
  const ExperimentResult r = run_experiment(cfg, *table);
  const auto& curve = r.report.pruning;
  double overall = 0.0, half = NAN;
  int violations = 0;
  std::string points;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].fraction < 0.3 - 1e-9) break;
    if (i == 0) overall = curve[i].mean_error;
    if (std::abs(curve[i].fraction - 0.5) < 1e-9) half = curve[i].mean_error;
    if (i > 0 && curve[i].mean_error > curve[i - 1].mean_error) ++violations;
    points += fmt("%s%.1f:%.2f", i ? " " : "", curve[i].fraction, curve[i].mean_error);
  }
  report(7, "uncertainty-error correlation", half < overall && violations <= kPruningViolations,
         fmt("mixed scene ubn, mean error %.2f deg overall vs %.2f deg for the most certain half, "
             "%d increases; curve ",
             overall, half, violations) +
             points);
}

void invariants() {
  std::mt19937_64 rng(8);
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) broken.push_back(what);
  };
  // Quaternion metric properties.
  bool tri = true, canon = true;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
    tri = tri && geodesic_distance(a, c) <= geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-12;
    canon = canon && UnitQuaternion::canonicalize(-a.coeffs()) == a;
  }
  expect(tri, "triangle inequality");
  expect(canon, "antipodal canonicalization");
  // Orthonormal frames from every V strategy.
  double worst = 0.0;
  std::normal_distribution<double> n;
  for (int i = 0; i < 10000; ++i) {
    Vec4 q(n(rng), n(rng), n(rng), n(rng));
    if (q.norm() < 1e-3) continue;
    worst = std::max(worst, (birdal_V(q.normalized()).transpose() * birdal_V(q.normalized()) -
                             Eigen::Matrix4d::Identity())
                                .cwiseAbs()
                                .maxCoeff());
    std::vector<double> raw(16);
    for (auto& x : raw) x = n(rng);
    const Eigen::Matrix4d G = build_V(VStrategy::GramSchmidt, raw);
    worst = std::max(worst, (G.transpose() * G - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
    const Eigen::Matrix4d C = build_V(VStrategy::Cayley, std::span<const double>(raw.data(), 4));
    worst = std::max(worst, (C.transpose() * C - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
  }
  expect(worst < 1e-9, "orthonormal V");
  // Mixture permutation invariance and normalization.
  std::vector<BinghamDistribution> comps;
  for (int i = 0; i < 3; ++i) {
    comps.emplace_back(oracle::random_orthogonal(rng), Eigen::Vector3d(-1.0 - i, -3.0 - 2 * i, -6.0 - 3 * i));
  }
  const BinghamMixture m(comps, {0.2, 0.5, 0.3});
  const BinghamMixture p({comps[2], comps[0], comps[1]}, {0.3, 0.2, 0.5});
  bool perm = true;
  for (int i = 0; i < 200; ++i) {
    const Vec4 q = random_rotation(rng).coeffs();
    perm = perm && std::abs(m.log_pdf(q) - p.log_pdf(q)) < 1e-12;
  }
  expect(perm, "mixture permutation invariance");
  const std::size_t draws = 1000000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = std::exp(m.log_pdf(random_rotation(rng).coeffs())) * 2.0 * kPi * kPi;
    s += v;
    s2 += v * v;
  }
  const double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
  expect(std::abs(mean - 1.0) < 3.0 * se, "mixture normalization");
  // Metrics: recall monotone, oracle never worse than the weighted mode.
  std::vector<PosePoint> pred, truth;
  std::vector<std::vector<PosePoint>> hyps;
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int i = 0; i < 300; ++i) {
    truth.push_back({random_rotation(rng), Eigen::Vector3d::Zero()});
    pred.push_back({random_rotation(rng), Eigen::Vector3d(u(rng), 0, 0)});
    hyps.push_back({pred.back(), {random_rotation(rng), Eigen::Vector3d::Zero()}});
  }
  bool mono = true;
  double prev = 0.0;
  for (double deg = 10.0; deg <= 180.0; deg += 10.0) {
    const double r = recall(pred, truth, RecallSpec{deg, 0.3});
    mono = mono && r >= prev;
    prev = r;
  }
  expect(mono, "recall monotone");
  const auto oracle_err = oracle_error(hyps, truth);
  bool le = true;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    le = le && oracle_err[i].rot_error <= geodesic_distance(pred[i].q, truth[i].q) + 1e-15;
  }
  expect(le, "oracle error <= weighted-mode error");
  std::string detail = "quaternion, orientation (10^4 frames), mixture (MC mean " + fmt("%.4f +- %.4f", mean, se) +
                       "), metrics";
  for (const auto& b : broken) detail += "; broken: " + b;
  report(8, "invariant suites", broken.empty(), detail);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "bingham_acceptance";
  std::filesystem::create_directories(dir);
  const GridSpec grid = GridSpec::cube(-60.0, 0.0, 10);
  NormalizationTable::build(grid, 1).save(dir / "t1.bin");
  NormalizationTable::build(grid, 2).save(dir / "t2.bin");
  const NormalizationTable table = NormalizationTable::load(dir / "t1.bin");
  ExperimentConfig cfg;
  cfg.scene = SceneSpec::parse("ambiguous_views");
  cfg.train.loss.scheme = Scheme::Mbn;
  cfg.train.M = 4;
  cfg.train.epochs = 5;
  cfg.train_samples = 256;
  cfg.test_samples = 50;
  write_json_file(dir / "r1.json", run_to_json(cfg, run_experiment(cfg, table)));
  write_json_file(dir / "r2.json", run_to_json(cfg, run_experiment(cfg, table)));
  const bool tables = slurp(dir / "t1.bin") == slurp(dir / "t2.bin");
  const bool runs = slurp(dir / "r1.json") == slurp(dir / "r2.json");
  std::filesystem::remove_all(dir);
  report(9, "determinism", tables && runs,
         std::string("table files ") + (tables ? "identical" : "differ") + ", run.json files " +
             (runs ? "identical" : "differ"));
}

}  // namespace

int main() {
  normalization_exactness();
  const NormalizationTable* table = table_fidelity();
  sampler_consistency();
  gradient_suite_check(table);
  mode_capture_and_diversity(table);
  uncertainty_error(table);
  invariants();
  determinism();
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " of 9 criteria failing" << std::endl;
  return failures ? 1 : 0;
}
