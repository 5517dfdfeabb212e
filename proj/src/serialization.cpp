#include "bingham/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "bingham/error.hpp"

namespace bingham {

namespace {

std::vector<double> numbers(const Json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an array of " + std::to_string(n));
  }
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

// JSON has no NaN; missing values are written as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const Vec4& q) { return Json::array({q[0], q[1], q[2], q[3]}); }
Json to_json(const Eigen::Vector3d& v) { return Json::array({v[0], v[1], v[2]}); }

Json to_json(const Eigen::Matrix4d& m) {
  Json rows = Json::array();
  for (int r = 0; r < 4; ++r) rows.push_back(to_json(Vec4(m.row(r).transpose())));
  return rows;
}

Vec4 vec4_from_json(const Json& j) {
  const auto v = numbers(j, 4, "quaternion");
  return Vec4(v[0], v[1], v[2], v[3]);
}

Eigen::Vector3d vec3_from_json(const Json& j) {
  const auto v = numbers(j, 3, "3-vector");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

Eigen::Matrix4d mat4_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::InvalidArgument, "V must have 4 rows");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) m.row(r) = vec4_from_json(j[static_cast<std::size_t>(r)]).transpose();
  return m;
}

Json to_json(const BinghamMixture& m) {
  Json comps = Json::array();
  for (const auto& c : m.components()) {
    comps.push_back({{"mode", to_json(c.mode().coeffs())},
                     {"V", to_json(c.V())},
                     {"lambda", to_json(c.lambda())},
                     {"log_F", c.log_F()},
                     {"grad_log_F", to_json(c.grad_log_F())}});
  }
  return {{"weights", m.weights()}, {"components", comps}};
}

BinghamMixture bingham_mixture_from_json(const Json& j) {
  std::vector<BinghamDistribution> comps;
  for (const auto& c : j.at("components")) {
    const Eigen::Matrix4d V = mat4_from_json(c.at("V"));
    const Eigen::Vector3d lambda = vec3_from_json(c.at("lambda"));
    if (c.contains("log_F") && c.contains("grad_log_F")) {
      LogNormalizer n;
      n.log_F = c.at("log_F").get<double>();
      n.grad = vec3_from_json(c.at("grad_log_F"));
      comps.emplace_back(V, lambda, n);
    } else {
      comps.emplace_back(V, lambda);
    }
  }
  return BinghamMixture(std::move(comps), j.at("weights").get<std::vector<double>>());
}

Json to_json(const GaussianMixture& m) {
  Json comps = Json::array();
  for (const auto& c : m.components()) comps.push_back({{"mean", to_json(c.mean)}, {"sigma2", to_json(c.sigma2)}});
  return {{"weights", m.weights()}, {"components", comps}};
}

GaussianMixture gaussian_mixture_from_json(const Json& j) {
  std::vector<GaussianComponent> comps;
  for (const auto& c : j.at("components")) {
    GaussianComponent g;
    g.mean = vec3_from_json(c.at("mean"));
    g.sigma2 = vec3_from_json(c.at("sigma2"));
    comps.push_back(g);
  }
  return GaussianMixture(std::move(comps), j.at("weights").get<std::vector<double>>());
}

Json to_json(const PoseHypothesis& h) {
  return {{"rotation", to_json(h.rotation.coeffs())},
          {"translation", to_json(h.translation)},
          {"weight", h.weight},
          {"rot_entropy", h.rot_entropy},
          {"trans_entropy", h.trans_entropy},
          {"uncertainty", h.uncertainty},
          {"combined_uncertainty", h.combined_uncertainty}};
}

PoseHypothesis pose_hypothesis_from_json(const Json& j) {
  PoseHypothesis h;
  h.rotation = UnitQuaternion::canonicalize(vec4_from_json(j.at("rotation")));
  h.translation = vec3_from_json(j.at("translation"));
  h.weight = j.at("weight").get<double>();
  h.rot_entropy = j.at("rot_entropy").get<double>();
  h.trans_entropy = j.at("trans_entropy").get<double>();
  h.uncertainty = j.at("uncertainty").get<double>();
  h.combined_uncertainty = j.at("combined_uncertainty").get<double>();
  return h;
}

Json to_json(const SamplePrediction& p) {
  Json modes = Json::array(), mode_t = Json::array(), hyps = Json::array();
  for (const auto& m : p.modes) modes.push_back(to_json(m.coeffs()));
  for (const auto& t : p.mode_translations) mode_t.push_back(to_json(t));
  for (const auto& h : p.hypotheses) hyps.push_back(to_json(h));
  Json j = {{"q", to_json(p.q.coeffs())},
            {"t", to_json(p.t)},
            {"modes", modes},
            {"mode_translations", mode_t},
            {"corrupted", p.corrupted},
            {"mixture", to_json(p.mixture)},
            {"hypotheses", hyps}};
  if (p.translation) j["translation"] = to_json(*p.translation);
  return j;
}

SamplePrediction sample_prediction_from_json(const Json& j) {
  SamplePrediction p;
  p.q = UnitQuaternion::canonicalize(vec4_from_json(j.at("q")));
  p.t = vec3_from_json(j.at("t"));
  for (const auto& m : j.at("modes")) p.modes.push_back(UnitQuaternion::canonicalize(vec4_from_json(m)));
  for (const auto& t : j.at("mode_translations")) p.mode_translations.push_back(vec3_from_json(t));
  p.corrupted = j.value("corrupted", false);
  p.mixture = bingham_mixture_from_json(j.at("mixture"));
  if (j.contains("translation")) p.translation = gaussian_mixture_from_json(j.at("translation"));
  for (const auto& h : j.at("hypotheses")) p.hypotheses.push_back(pose_hypothesis_from_json(h));
  return p;
}

Json to_json(const RecallSpec& s) {
  return {{"rot_threshold_deg", s.rot_threshold_deg}, {"trans_threshold_m", s.trans_threshold_m}};
}

Json to_json(const EvalReport& r) {
  Json recall = Json::array();
  for (std::size_t i = 0; i < r.specs.size(); ++i) {
    Json row = to_json(r.specs[i]);
    row["recall"] = r.recall[i];
    row["oracle_recall"] = r.oracle_recall[i];
    recall.push_back(row);
  }
  Json pruning = Json::array();
  for (const auto& p : r.pruning) {
    pruning.push_back({{"fraction", p.fraction},
                       {"retained", p.retained},
                       {"mean_error_deg", p.mean_error},
                       {"max_uncertainty", p.max_uncertainty}});
  }
  Json thresholds = Json::array();
  for (const auto& t : r.thresholds) {
    thresholds.push_back({{"uncertainty_threshold", t.threshold},
                          {"count", t.count},
                          {"mean_error_deg", number_or_null(t.mean_error)}});
  }
  return {{"scene", r.scene},
          {"samples", r.samples},
          {"recall", recall},
          {"median_rot_error_deg", r.median_rot_error_deg},
          {"median_trans_error_m", r.median_trans_error_m},
          {"mean_rot_error_deg", r.mean_rot_error_deg},
          {"mean_oracle_rot_error_deg", r.mean_oracle_rot_error_deg},
          {"semd", r.semd},
          {"mode_detection", {{"spec", to_json(r.mode_spec)}, {"rate", r.mode_detection_rate}}},
          {"chamfer", {{"mean", r.chamfer_mean}, {"median", r.chamfer_median}}},
          {"pruning_curve", pruning},
          {"uncertainty_thresholds", thresholds}};
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string pruning_csv(const EvalReport& r) {
  std::string s = "retained_fraction,retained,mean_rot_error_deg,max_uncertainty\n";
  for (const auto& p : r.pruning) {
    s += csv_number(p.fraction) + ',' + std::to_string(p.retained) + ',' + csv_number(p.mean_error) + ',' +
         csv_number(p.max_uncertainty) + '\n';
  }
  return s;
}

std::string threshold_csv(const EvalReport& r) {
  std::string s = "uncertainty_threshold,count,mean_rot_error_deg\n";
  for (const auto& t : r.thresholds) {
    s += csv_number(t.threshold) + ',' + std::to_string(t.count) + ',' + csv_number(t.mean_error) + '\n';
  }
  return s;
}

std::string recall_csv(const EvalReport& r) {
  std::string s = "rot_threshold_deg,trans_threshold_m,recall,oracle_recall\n";
  for (std::size_t i = 0; i < r.specs.size(); ++i) {
    s += csv_number(r.specs[i].rot_threshold_deg) + ',' + csv_number(r.specs[i].trans_threshold_m) + ',' +
         csv_number(r.recall[i]) + ',' + csv_number(r.oracle_recall[i]) + '\n';
  }
  return s;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IoError, "cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace bingham
