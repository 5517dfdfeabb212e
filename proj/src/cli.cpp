#include "bingham/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "bingham/distribution.hpp"
#include "bingham/error.hpp"
#include "bingham/experiment.hpp"
#include "bingham/orientation.hpp"
#include "bingham/serialization.hpp"
#include "bingham/table.hpp"

namespace bingham {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid number '") + item + "' in " + what);
    }
  }
  if (expected && v.size() != expected) {
    throw UsageError(std::string(what) + " needs " + std::to_string(expected) + " comma-separated values");
  }
  return v;
}

std::vector<RecallSpec> parse_thresholds(const std::string& text) {
  std::vector<RecallSpec> specs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("threshold '" + item + "' must be deg:meters");
    RecallSpec s;
    try {
      s.rot_threshold_deg = std::stod(item.substr(0, colon));
      s.trans_threshold_m = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("threshold '" + item + "' must be deg:meters");
    }
    if (!(s.rot_threshold_deg > 0.0 && s.trans_threshold_m > 0.0)) {
      throw UsageError("thresholds must be positive");
    }
    specs.push_back(s);
  }
  if (specs.empty()) throw UsageError("no thresholds given");
  return specs;
}

struct Shared {
  unsigned threads = 1;
  std::string table;
};

NormalizationTable resolve_table(const Shared& shared, std::ostream& err) {
  std::string path = shared.table;
  if (path.empty()) {
    if (const char* env = std::getenv("BINGHAM_TABLE"); env && *env) path = env;
  }
  if (!path.empty()) return NormalizationTable::load(path);
  err << "no table given (--table or BINGHAM_TABLE); building the default 32^3 grid in memory\n";
  return NormalizationTable::build(GridSpec{}, shared.threads);
}

// ----------------------------------------------------------------------------

struct TableGenArgs {
  std::string range = "-100,0";
  std::string counts = "32,32,32";
  std::string out;
};

int cmd_table_gen(const TableGenArgs& a, const Shared& shared, std::ostream& err) {
  const auto range = parse_list(a.range, 2, "--range");
  const auto counts = parse_list(a.counts, 3, "--counts");
  GridSpec grid;
  for (int i = 0; i < 3; ++i) {
    if (counts[i] < 2 || counts[i] != std::floor(counts[i])) throw UsageError("--counts must be integers >= 2");
    grid.axes[i] = {range[0], range[1], static_cast<std::uint32_t>(counts[i])};
  }
  try {
    grid.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::string out = a.out;
  if (out.empty()) {
    if (const char* env = std::getenv("BINGHAM_TABLE"); env && *env) out = env;
  }
  if (out.empty()) throw UsageError("--out is required (or set BINGHAM_TABLE)");
  const auto table = NormalizationTable::build(grid, shared.threads);
  table.save(out);
  err << "wrote " << table.values().size() << " nodes to " << out << "\n";
  return kExitOk;
}

struct SampleArgs {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string lambda = "-5,-10,-20";
  std::string mode = "1,0,0,0";
  std::string out;
};

void emit(const std::string& path, const Json& j, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << "\n";
  } else {
    write_json_file(path, j);
  }
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const auto l = parse_list(a.lambda, 3, "--lambda");
  const auto m = parse_list(a.mode, 4, "--mode");
  const Vec4 mode(m[0], m[1], m[2], m[3]);
  if (!(mode.norm() > 1e-12)) throw UsageError("--mode must be a nonzero quaternion");
  const Eigen::Matrix4d V = birdal_V(mode.normalized());
  const BinghamDistribution d(V, Eigen::Vector3d(l[0], l[1], l[2]));
  Json samples = Json::array();
  for (const auto& q : d.sample(a.n, a.seed)) samples.push_back(to_json(q.coeffs()));
  emit(a.out, {{"V", to_json(V)}, {"lambda", to_json(d.lambda())}, {"seed", a.seed}, {"samples", samples}}, out);
  return kExitOk;
}

struct FitArgs {
  std::string in;
  std::string out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Json j = read_json_file(a.in);
  if (!j.contains("samples")) throw Error(ErrorCode::InvalidArgument, a.in + " has no 'samples' array");
  std::vector<Vec4> xs;
  for (const auto& s : j.at("samples")) xs.push_back(vec4_from_json(s));
  const BinghamDistribution d = fit_mle(xs);
  emit(a.out,
       {{"mode", to_json(d.mode().coeffs())},
        {"V", to_json(d.V())},
        {"lambda", to_json(d.lambda())},
        {"log_F", d.log_F()},
        {"entropy", d.entropy()},
        {"samples_used", xs.size()}},
       out);
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string scene = "cyclic_4";
  std::string scheme = "mbn";
  std::size_t M = 10;
  std::uint64_t seed = 7;
  std::size_t epochs = 0;  // 0: scene default
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double lr_decay = 1.0;
  double epsilon = 0.05;
  std::string selection;  // empty: scene default
  std::string v_strategy = "birdal";
  std::string hidden = "64,128,128";
  std::size_t ewta_interval = 0;
  std::size_t train_samples = 2000;
  std::size_t test_samples = 300;
  std::string thresholds;
  std::string out = "run.json";
  bool fixed_data = false;
  std::size_t log_every = 25;
};

// Keys accepted in a train-toy JSON config, mapped to their flag names.
const std::map<std::string, std::string> kConfigKeys = {
    {"scene", "--scene"},
    {"scheme", "--scheme"},
    {"M", "--M"},
    {"seed", "--seed"},
    {"epochs", "--epochs"},
    {"batch_size", "--batch-size"},
    {"learning_rate", "--lr"},
    {"lr_decay", "--lr-decay"},
    {"epsilon", "--epsilon"},
    {"selection", "--selection"},
    {"v_strategy", "--v-strategy"},
    {"hidden", "--hidden"},
    {"ewta_interval", "--ewta-interval"},
    {"train_samples", "--train-samples"},
    {"test_samples", "--test-samples"},
    {"thresholds", "--thresholds"},
    {"table", "--table"},
    {"threads", "--threads"},
    {"resample", "--fixed-data"},
};

template <typename T>
void take(const Json& j, const char* key, T& field, const CLI::App& app, const std::string& flag) {
  if (!j.contains(key) || app.get_option(flag)->count() > 0) return;
  try {
    field = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

void apply_config(TrainArgs& a, Shared& shared, const CLI::App& app, const CLI::App& root) {
  const Json j = read_json_file(a.config);
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) throw UsageError("unknown config key '" + key + "'");
  }
  take(j, "scene", a.scene, app, "--scene");
  take(j, "scheme", a.scheme, app, "--scheme");
  take(j, "M", a.M, app, "--M");
  take(j, "seed", a.seed, app, "--seed");
  take(j, "epochs", a.epochs, app, "--epochs");
  take(j, "batch_size", a.batch_size, app, "--batch-size");
  take(j, "learning_rate", a.learning_rate, app, "--lr");
  take(j, "lr_decay", a.lr_decay, app, "--lr-decay");
  take(j, "epsilon", a.epsilon, app, "--epsilon");
  take(j, "selection", a.selection, app, "--selection");
  take(j, "v_strategy", a.v_strategy, app, "--v-strategy");
  take(j, "ewta_interval", a.ewta_interval, app, "--ewta-interval");
  take(j, "train_samples", a.train_samples, app, "--train-samples");
  take(j, "test_samples", a.test_samples, app, "--test-samples");
  take(j, "thresholds", a.thresholds, app, "--thresholds");
  if (j.contains("resample") && app.get_option("--fixed-data")->count() == 0) {
    bool resample = true;
    take(j, "resample", resample, app, "--fixed-data");
    a.fixed_data = !resample;
  }
  if (root.get_option("--table")->count() == 0) take(j, "table", shared.table, app, "--table");
  if (root.get_option("--threads")->count() == 0) take(j, "threads", shared.threads, app, "--threads");
  if (j.contains("hidden") && app.get_option("--hidden")->count() == 0) {
    std::string h;
    for (const auto& x : j.at("hidden")) h += (h.empty() ? "" : ",") + std::to_string(x.get<std::size_t>());
    a.hidden = h;
  }
}

ExperimentConfig experiment_config(const TrainArgs& a) {
  ExperimentConfig cfg;
  try {
    cfg.scene = SceneSpec::parse(a.scene);
    cfg.train.loss.scheme = parse_scheme(a.scheme);
    cfg.train.strategy = parse_v_strategy(a.v_strategy);
    const bool point_cloud = !cfg.scene.has_translation();
    cfg.train.loss.rwta.selection =
        a.selection.empty() ? (point_cloud ? Selection::Probability : Selection::L1) : parse_selection(a.selection);
    cfg.train.epochs = a.epochs ? a.epochs : (point_cloud ? 500 : 300);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  cfg.train.M = cfg.train.loss.scheme == Scheme::Ubn ? 1 : a.M;
  cfg.train.seed = a.seed;
  cfg.train.batch_size = a.batch_size;
  cfg.train.learning_rate = a.learning_rate;
  cfg.train.lr_decay = a.lr_decay;
  cfg.train.loss.rwta.epsilon = a.epsilon;
  cfg.train.ewta_interval = a.ewta_interval;
  cfg.train.resample = !a.fixed_data;
  cfg.train.hidden.clear();
  for (double h : parse_list(a.hidden, 0, "--hidden")) {
    if (h < 1 || h != std::floor(h)) throw UsageError("--hidden must list positive integers");
    cfg.train.hidden.push_back(static_cast<std::size_t>(h));
  }
  cfg.train_samples = a.train_samples;
  cfg.test_samples = a.test_samples;
  if (!a.thresholds.empty()) cfg.specs = parse_thresholds(a.thresholds);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int cmd_train_toy(const TrainArgs& a, const Shared& shared, std::ostream& err) {
  const ExperimentConfig cfg = experiment_config(a);
  const NormalizationTable table = resolve_table(shared, err);
  const std::size_t every = a.log_every;
  const auto result = run_experiment(cfg, table, [&](std::size_t epoch, double loss) {
    if (every && ((epoch + 1) % every == 0 || epoch + 1 == cfg.train.epochs)) {
      err << "epoch " << epoch + 1 << "/" << cfg.train.epochs << " loss " << loss << "\n";
    }
  });
  write_json_file(a.out, run_to_json(cfg, result));
  err << "mode detection " << result.report.mode_detection_rate << ", semd " << result.report.semd
      << ", median error " << result.report.median_rot_error_deg << " deg; wrote " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string run;
  std::string thresholds = "10:0.1,15:0.2,20:0.3";
  std::string out = "report.json";
};

EvalReport report_from_run(const Json& run, const std::vector<RecallSpec>& specs) {
  if (run.value("format", "") != "bingham-run") throw Error(ErrorCode::InvalidArgument, "not a run file");
  std::vector<SamplePrediction> preds;
  for (const auto& p : run.at("predictions")) preds.push_back(sample_prediction_from_json(p));
  const SceneSpec scene = SceneSpec::parse(run.at("config").at("scene").get<std::string>());
  const auto points = scene.has_translation() ? std::vector<Eigen::Vector3d>{} : scene_template(scene);
  return evaluate(scene.name(), preds, specs, points);
}

int cmd_eval(const EvalArgs& a, std::ostream& err) {
  const auto specs = parse_thresholds(a.thresholds);
  const EvalReport report = report_from_run(read_json_file(a.run), specs);
  write_json_file(a.out, to_json(report));
  fs::path csv = a.out;
  csv.replace_extension(".csv");
  write_text_file(csv, pruning_csv(report));
  err << "wrote " << a.out << " and " << csv.string() << "\n";
  return kExitOk;
}

struct ExportArgs {
  std::string run;
  std::string thresholds = "10:0.1,15:0.2,20:0.3";
  std::string out_dir = "plots";
};

int cmd_export_plots(const ExportArgs& a, std::ostream& err) {
  const Json run = read_json_file(a.run);
  const EvalReport report = report_from_run(run, parse_thresholds(a.thresholds));
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + a.out_dir);
  const fs::path dir = a.out_dir;
  std::string trace = "epoch,loss\n";
  const auto losses = run.at("train").at("loss_trace").get<std::vector<double>>();
  for (std::size_t i = 0; i < losses.size(); ++i) trace += std::to_string(i + 1) + ',' + csv_number(losses[i]) + '\n';
  write_text_file(dir / "loss_trace.csv", trace);
  write_text_file(dir / "pruning_curve.csv", pruning_csv(report));
  write_text_file(dir / "uncertainty_thresholds.csv", threshold_csv(report));
  write_text_file(dir / "recall.csv", recall_csv(report));
  err << "wrote 4 CSV files to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bingham distribution toolkit"};
  app.require_subcommand(1);
  Shared shared;
  app.add_option("--threads", shared.threads, "Worker threads for table generation")
      ->check(CLI::Range(1u, 256u));
  app.add_option("--table", shared.table, "Normalization table (default: $BINGHAM_TABLE)");

  TableGenArgs tg;
  auto* table_gen = app.add_subcommand("table-gen", "Precompute the log-normalizer table");
  table_gen->add_option("--range", tg.range, "Concentration range min,max for every axis")->capture_default_str();
  table_gen->add_option("--counts", tg.counts, "Nodes per axis")->capture_default_str();
  table_gen->add_option("--out", tg.out, "Output file (default: $BINGHAM_TABLE)");
  table_gen->add_option("--threads", shared.threads)->check(CLI::Range(1u, 256u));

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw samples from a Bingham distribution");
  sample->add_option("--n", sa.n, "Number of samples")->capture_default_str();
  sample->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  sample->add_option("--lambda", sa.lambda, "Concentrations l1,l2,l3")->capture_default_str();
  sample->add_option("--mode", sa.mode, "Mode quaternion w,x,y,z")->capture_default_str();
  sample->add_option("--out", sa.out, "Output JSON (default: stdout)");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit of samples");
  fit->add_option("--in", fa.in, "Samples JSON as written by `sample`")->required();
  fit->add_option("--out", fa.out, "Output JSON (default: stdout)");

  TrainArgs ta;
  auto* train_toy = app.add_subcommand("train-toy", "Train and evaluate on a synthetic scene");
  train_toy->add_option("--config", ta.config, "JSON config; flags override its keys");
  train_toy->add_option("--scene", ta.scene, "cyclic_<k>, asymmetric, ambiguous_views or mixed")->capture_default_str();
  train_toy->add_option("--scheme", ta.scheme, "ubn, mbn-ce, mbn, mb-only, wta or ewta")->capture_default_str();
  train_toy->add_option("--M", ta.M, "Mixture components")->capture_default_str();
  train_toy->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train_toy->add_option("--epochs", ta.epochs, "Epochs (default 500 for point clouds, 300 for views)");
  train_toy->add_option("--batch-size", ta.batch_size)->capture_default_str();
  train_toy->add_option("--lr", ta.learning_rate, "Adam learning rate")->capture_default_str();
  train_toy->add_option("--lr-decay", ta.lr_decay, "Per-epoch learning-rate factor")->capture_default_str();
  train_toy->add_option("--epsilon", ta.epsilon, "RWTA relaxation")->capture_default_str();
  train_toy->add_option("--selection", ta.selection, "Branch selection: l1 or probability");
  train_toy->add_option("--v-strategy", ta.v_strategy, "gram_schmidt, birdal or cayley")->capture_default_str();
  train_toy->add_option("--hidden", ta.hidden, "Hidden layer widths")->capture_default_str();
  train_toy->add_option("--ewta-interval", ta.ewta_interval, "Epochs between EWTA halvings");
  train_toy->add_option("--train-samples", ta.train_samples)->capture_default_str();
  train_toy->add_option("--test-samples", ta.test_samples)->capture_default_str();
  train_toy->add_option("--thresholds", ta.thresholds, "Recall thresholds deg:m,...");
  train_toy->add_flag("--fixed-data", ta.fixed_data, "Reuse one training set instead of fresh samples per epoch");
  train_toy->add_option("--log-every", ta.log_every, "Epochs between progress lines (0: silent)");
  train_toy->add_option("--out", ta.out, "Run file")->capture_default_str();
  train_toy->add_option("--table", shared.table, "Normalization table (default: $BINGHAM_TABLE)");
  train_toy->add_option("--threads", shared.threads)->check(CLI::Range(1u, 256u));

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a run file");
  eval->add_option("--run", ea.run, "Run file from train-toy")->required();
  eval->add_option("--thresholds", ea.thresholds, "Recall thresholds deg:m,...")->capture_default_str();
  eval->add_option("--out", ea.out, "Report JSON; the CSV goes next to it")->capture_default_str();

  ExportArgs xa;
  auto* export_plots = app.add_subcommand("export-plots", "Write CSV data for plots");
  export_plots->add_option("--run", xa.run, "Run file from train-toy")->required();
  export_plots->add_option("--thresholds", xa.thresholds)->capture_default_str();
  export_plots->add_option("--out-dir", xa.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (table_gen->parsed()) return cmd_table_gen(tg, shared, err);
    if (sample->parsed()) return cmd_sample(sa, out);
    if (fit->parsed()) return cmd_fit(fa, out);
    if (train_toy->parsed()) {
      if (!ta.config.empty()) apply_config(ta, shared, *train_toy, app);
      return cmd_train_toy(ta, shared, err);
    }
    if (eval->parsed()) return cmd_eval(ea, err);
    if (export_plots->parsed()) return cmd_export_plots(xa, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace bingham
