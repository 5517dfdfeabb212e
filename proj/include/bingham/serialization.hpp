#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "bingham/metrics.hpp"
#include "bingham/mixture.hpp"
#include "bingham/quaternion.hpp"

namespace bingham {

using Json = nlohmann::json;

Json to_json(const Vec4& q);
Json to_json(const Eigen::Vector3d& v);
Json to_json(const Eigen::Matrix4d& m);  // array of rows

Vec4 vec4_from_json(const Json& j);
Eigen::Vector3d vec3_from_json(const Json& j);
Eigen::Matrix4d mat4_from_json(const Json& j);

/// {weights, components: [{mode, V, lambda, log_F, grad_log_F}]}
Json to_json(const BinghamMixture& m);
BinghamMixture bingham_mixture_from_json(const Json& j);

/// {weights, components: [{mean, sigma2}]}
Json to_json(const GaussianMixture& m);
GaussianMixture gaussian_mixture_from_json(const Json& j);

Json to_json(const PoseHypothesis& h);
PoseHypothesis pose_hypothesis_from_json(const Json& j);

Json to_json(const SamplePrediction& p);
SamplePrediction sample_prediction_from_json(const Json& j);

Json to_json(const RecallSpec& s);
Json to_json(const EvalReport& r);

/// Shortest round-trip decimal; empty for NaN and infinities.
std::string csv_number(double v);

/// Pruning curve and uncertainty-threshold table as CSV text.
std::string pruning_csv(const EvalReport& r);
std::string threshold_csv(const EvalReport& r);
std::string recall_csv(const EvalReport& r);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. Throws Error(IoError).
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace bingham
