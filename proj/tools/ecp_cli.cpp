// ecp: generate data, train coverage policies, pick lambda, predict, validate.
//
// Every command writes into --out (a directory) and leaves a JSON manifest
// there holding schema_version and the resolved configuration. Passing that
// manifest back with --config replays the run; flags given explicitly on the
// command line win over the replayed ones.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecp/ecp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- option sets -------------------------------------------------------------

struct DataOptions {
  std::string task;
  std::uint64_t data_seed = 0;
  std::size_t n_train = 100;
  std::size_t n_calib = 100;
  std::size_t n_test = 100;
  double slope = 2.0;
  double noise_sd = 1.0;
  double x_lo = -5.0;
  double x_hi = 5.0;
  std::size_t classes = 10;
  std::size_t feature_dim = 8;
  std::uint64_t logit_seed = 7;
  double temperature = 1.0;

  void add(CLI::App* app, const char* seed_flag) {
    app->add_option("--task", task, "regression | classification")->required();
    app->add_option(seed_flag, data_seed, "data seed");
    app->add_option("--n-train", n_train, "regression training points for the OLS predictor");
    app->add_option("--n-calib", n_calib, "calibration points");
    app->add_option("--n-test", n_test, "test points");
    app->add_option("--slope", slope, "regression: true slope");
    app->add_option("--noise-sd", noise_sd, "regression: noise standard deviation");
    app->add_option("--x-lo", x_lo, "regression: lower end of the X range");
    app->add_option("--x-hi", x_hi, "regression: upper end of the X range");
    app->add_option("--classes", classes, "classification: number of classes K");
    app->add_option("--feature-dim", feature_dim, "classification: feature dimension");
    app->add_option("--logit-seed", logit_seed, "classification: seed of the logit matrix");
    app->add_option("--temperature", temperature, "classification: softmax temperature");
  }

  ecp::SyntheticRegressionSpec regression() const {
    ecp::SyntheticRegressionSpec s;
    s.slope = slope;
    s.noise_sd = noise_sd;
    s.x_lo = x_lo;
    s.x_hi = x_hi;
    s.n_train = n_train;
    s.n_calib = n_calib;
    s.n_test = n_test;
    s.seed = data_seed;
    return s;
  }

  ecp::SyntheticClassificationSpec classification() const {
    ecp::SyntheticClassificationSpec s;
    s.n_classes = classes;
    s.feature_dim = feature_dim;
    s.logit_matrix_seed = logit_seed;
    s.temperature = temperature;
    s.n_calib = n_calib;
    s.n_test = n_test;
    s.seed = data_seed;
    return s;
  }

  json to_json(std::string_view seed_key) const {
    json j{{"task", task}, {std::string(seed_key), data_seed}, {"n-calib", n_calib},
           {"n-test", n_test}};
    if (task == "regression") {
      j.update({{"n-train", n_train}, {"slope", slope}, {"noise-sd", noise_sd}, {"x-lo", x_lo},
                {"x-hi", x_hi}});
    } else {
      j.update({{"classes", classes}, {"feature-dim", feature_dim}, {"logit-seed", logit_seed},
                {"temperature", temperature}});
    }
    return j;
  }
};

struct TrainOptions {
  std::string task;
  std::string calib;
  double lambda = 50.0;
  double k = 100.0;
  double lr = 1e-3;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> epochs;
  std::uint64_t seed = 0;
  std::size_t hidden = 32;
  std::string policy_input = "definition2";
  std::optional<bool> init_near_one;

  void add(CLI::App* app, bool with_lambda) {
    app->add_option("--task", task, "regression | classification")->required();
    app->add_option("--calib", calib, "calibration scores CSV")->required();
    if (with_lambda) app->add_option("--lambda", lambda, "miscoverage penalty");
    app->add_option("--k", k, "sigmoid sharpness of the smooth classification size");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--batch", batch, "minibatch size (default 64 classification, 32 regression)");
    app->add_option("--epochs", epochs, "epochs (default 2000 classification, 200 regression)");
    app->add_option("--seed", seed, "training seed");
    app->add_option("--hidden", hidden, "hidden units");
    app->add_option("--policy-input", policy_input, "definition2 | loo-score");
    app->add_option("--init-near-one", init_near_one,
                    "start the policy output near alpha_hi (default: on for regression)");
  }

  ecp::TrainConfig resolve(ecp::Task t) const {
    ecp::TrainConfig c = ecp::TrainConfig::defaults_for(t);
    c.lambda = lambda;
    c.k = k;
    c.lr = lr;
    if (batch) c.batch_size = *batch;
    if (epochs) c.epochs = *epochs;
    c.seed = seed;
    c.hidden_dim = hidden;
    c.input_kind = ecp::parse_policy_input(policy_input);
    if (init_near_one) c.init_output_near_one = *init_near_one;
    return c;
  }

  /// Flag-keyed form of a resolved config.
  static json to_json(std::string_view task, std::string_view calib, const ecp::TrainConfig& c,
                      bool with_lambda) {
    json j{{"task", task},
           {"calib", calib},
           {"k", c.k},
           {"lr", c.lr},
           {"batch", c.batch_size},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"hidden", c.hidden_dim},
           {"policy-input", std::string(ecp::to_string(c.input_kind))},
           {"init-near-one", c.init_output_near_one}};
    if (with_lambda) j["lambda"] = c.lambda;
    return j;
  }
};

// --- shared helpers ----------------------------------------------------------

ecp::Task task_or_usage(const std::string& s) {
  try {
    return ecp::parse_task(s);
  } catch (const ecp::Error& e) {
    throw UsageError(e.what());
  }
}

ecp::CalibrationSet load_calibration(const std::string& path, ecp::Task task) {
  if (task == ecp::Task::regression) {
    return ecp::CalibrationSet::regression(ecp::load_regression_calib_csv(path).scores);
  }
  return ecp::CalibrationSet::classification(ecp::load_classification_csv(path).rows);
}

json manifest(std::string_view command, json config) {
  config["command"] = command;
  return {{"schema_version", ecp::kSchemaVersion}, {"config", std::move(config)}};
}

void write_json(const fs::path& path, const json& j) { ecp::write_text_file(path, ecp::dump_json(j)); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("'" + item + "' in list '" + text + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::string join_members(const ecp::LabelSet& set) {
  std::string s;
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    s += (i ? ";" : "") + std::to_string(set.members[i]);
  }
  return s;
}

// --- gen ---------------------------------------------------------------------

void run_gen(const DataOptions& d, const fs::path& out) {
  const ecp::Task task = task_or_usage(d.task);
  json info;
  if (task == ecp::Task::regression) {
    const auto data = ecp::gen_synthetic_regression(d.regression());
    ecp::save_regression_calib_csv(out / "calib.csv", ecp::sequential_ids(data.calib.size()),
                                   data.calib_scores());
    ecp::save_regression_test_csv(out / "test.csv",
                                  {ecp::sequential_ids(data.test.size()), data.test, true});
    info = {{"fit", {{"slope", data.fit.slope}, {"intercept", data.fit.intercept}}}};
  } else {
    const auto data = ecp::gen_synthetic_classification(d.classification());
    ecp::save_classification_csv(out / "calib.csv", ecp::sequential_ids(data.calib.size()),
                                 data.calib);
    ecp::save_classification_csv(out / "test.csv", ecp::sequential_ids(data.test.size()),
                                 data.test);
  }
  json m = manifest("gen", d.to_json("seed"));
  m["files"] = {"calib.csv", "test.csv"};
  if (!info.is_null()) m.update(info);
  write_json(out / "gen.json", m);
}

// --- train -------------------------------------------------------------------

void run_train(const TrainOptions& t, const fs::path& out) {
  const ecp::Task task = task_or_usage(t.task);
  const ecp::CalibrationSet calib = load_calibration(t.calib, task);
  const ecp::TrainConfig cfg = t.resolve(task);
  const json config = TrainOptions::to_json(t.task, t.calib, cfg, true);

  const auto result = ecp::train_policy(calib, cfg);
  ecp::save_checkpoint(out / "checkpoint.json", result.params,
                       {cfg.k, cfg.lambda, cfg.seed, manifest("train", config)["config"]});
  json report = manifest("train", config);
  report["report"] = ecp::to_json(result.report);
  write_json(out / "train_report.json", report);
  ecp::write_text_file(out / "curves.csv", ecp::format_epoch_curves_csv(result.report));
  std::cerr << "trained " << cfg.epochs << " epochs in " << result.report.wall_seconds
            << " s; leave-one-out mean size " << result.report.loo_mean_size << "\n";
}

// --- select-lambda -----------------------------------------------------------

struct SearchOptions {
  double target_size = 2.0;
  double tol = 0.1;
  double init_lambda = 10.0;
  std::size_t max_expansions = 60;
  std::size_t max_bisections = 60;

  void add(CLI::App* app) {
    app->add_option("--target-size", target_size, "target mean leave-one-out size M");
    app->add_option("--tol", tol, "tolerance on |size - M|");
    app->add_option("--init-lambda", init_lambda, "initial lambda");
    app->add_option("--max-expansions", max_expansions, "bracketing budget");
    app->add_option("--max-bisections", max_bisections, "bisection budget");
  }
};

void run_select_lambda(const TrainOptions& t, const SearchOptions& s, const fs::path& out) {
  const ecp::Task task = task_or_usage(t.task);
  const ecp::CalibrationSet calib = load_calibration(t.calib, task);
  const ecp::TrainConfig base = t.resolve(task);
  ecp::LambdaSearchConfig cfg;
  cfg.target_size = s.target_size;
  cfg.tolerance = s.tol;
  cfg.initial_lambda = s.init_lambda;
  cfg.max_expansions = s.max_expansions;
  cfg.max_bisections = s.max_bisections;
  cfg.master_seed = base.seed;

  json config = TrainOptions::to_json(t.task, t.calib, base, false);
  config.update({{"target-size", cfg.target_size},
                 {"tol", cfg.tolerance},
                 {"init-lambda", cfg.initial_lambda},
                 {"max-expansions", cfg.max_expansions},
                 {"max-bisections", cfg.max_bisections}});

  ecp::TrainingEvaluator evaluator(calib, base);
  const ecp::SearchTrace trace = ecp::select_lambda(evaluator, cfg);
  const ecp::SearchStep* chosen = nullptr;
  for (const auto& step : trace.steps) {
    if (step.lambda == trace.lambda_m) chosen = &step;
  }
  const auto& run = evaluator.run_for(*chosen);

  json m = manifest("select-lambda", config);
  m["trace"] = ecp::to_json(trace);
  write_json(out / "search.json", m);
  ecp::write_text_file(out / "search.csv", ecp::format_search_trace_csv(trace));
  ecp::save_checkpoint(out / "checkpoint.json", run.params,
                       {run.report.config.k, run.report.config.lambda, run.report.config.seed,
                        m["config"]});
  std::cerr << "lambda_M = " << trace.lambda_m << (trace.converged ? "" : " (not converged)")
            << " after " << trace.steps.size() << " evaluations\n";
}

// --- predict -----------------------------------------------------------------

void run_predict(const std::string& checkpoint, const std::string& calib_path,
                 const std::string& test_path, const fs::path& out) {
  const auto [params, meta] = ecp::load_checkpoint(checkpoint);
  if (params.input_kind != ecp::PolicyInputKind::definition2) {
    throw ecp::Error(ecp::ErrorKind::invalid_argument,
                     "checkpoint uses the loo-score input, which has no test-time value");
  }
  const ecp::NetworkPolicy policy(params);
  const ecp::CalibrationSet calib = load_calibration(calib_path, params.task);
  if (calib.size() != params.n_calib) {
    std::cerr << "warning: policy trained with n = " << params.n_calib
              << ", calibration file has n = " << calib.size() << "\n";
  }
  const ecp::CalibScores& scores = calib.scores;

  std::string csv;
  json summary;
  if (params.task == ecp::Task::classification) {
    const auto test = ecp::load_classification_csv(test_path);
    std::vector<ecp::CandidateScores> cands;
    for (const auto& r : test.rows) cands.push_back(r.scores);
    const auto sets = ecp::e_adaptive(policy, scores, cands);
    csv = "id,alpha,size,members\n";
    std::size_t labeled = 0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      csv += std::to_string(test.ids[i]) + "," + ecp::format_double(sets.alphas[i]) + "," +
             std::to_string(sets.sets[i].size()) + "," + join_members(sets.sets[i]) + "\n";
      if (test.rows[i].label >= 0) {
        ++labeled;
        covered += sets.sets[i].contains(test.rows[i].label) ? 1 : 0;
      }
    }
    summary = {{"rows", cands.size()}, {"mean_size", sets.mean_size},
               {"mean_alpha", sets.mean_alpha}};
    if (labeled) summary["coverage"] = static_cast<double>(covered) / static_cast<double>(labeled);
  } else {
    const auto test = ecp::load_regression_test_csv(test_path);
    std::vector<double> centers;
    for (const auto& s : test.samples) centers.push_back(s.prediction);
    const auto ivs = ecp::e_adaptive(policy, scores, centers);
    csv = test.has_labels ? "id,alpha,lower,upper,size,covered\n" : "id,alpha,lower,upper,size\n";
    std::size_t covered = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const auto& iv = ivs.intervals[i];
      csv += std::to_string(test.ids[i]) + "," + ecp::format_double(ivs.alphas[i]) + "," +
             ecp::format_double(iv.lower()) + "," + ecp::format_double(iv.upper()) + "," +
             ecp::format_double(iv.size());
      if (test.has_labels) {
        const bool in = iv.contains(*test.samples[i].label);
        covered += in ? 1 : 0;
        csv += in ? ",1" : ",0";
      }
      csv += "\n";
    }
    summary = {{"rows", centers.size()}, {"mean_size", ivs.mean_size},
               {"mean_alpha", ivs.mean_alpha}};
    if (test.has_labels && !centers.empty()) {
      summary["coverage"] = static_cast<double>(covered) / static_cast<double>(centers.size());
    }
  }
  ecp::write_text_file(out / "predictions.csv", csv);
  json m = manifest("predict", {{"checkpoint", checkpoint}, {"calib", calib_path}, {"test", test_path}});
  m["summary"] = summary;
  write_json(out / "predict.json", m);
}

// --- validate ----------------------------------------------------------------

struct ValidateOptions {
  std::string check;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.1;
  std::string checkpoint;
  std::string calib;
  std::string ns = "100,400";
  std::size_t reps = 20;
  std::string regime = "fresh";
  std::string lambdas = "5,10,20,50,100";
  double grid_resolution = 1e-4;
  bool records = false;

  void add(CLI::App* app) {
    app->add_option("--check", check, "coverage | posthoc | size-consistency | monotonicity")
        ->required();
    app->add_option("--trials", trials, "Monte Carlo trials");
    app->add_option("--seed", seed, "master seed for trials");
    app->add_option("--alpha", alpha, "constant alpha (used when no --checkpoint is given)");
    app->add_option("--checkpoint", checkpoint, "trained policy");
    app->add_option("--calib", calib, "monotonicity: calibration scores CSV");
    app->add_option("--ns", ns, "size-consistency: comma-separated calibration sizes");
    app->add_option("--reps", reps, "size-consistency: calibration draws per n");
    app->add_option("--regime", regime, "fresh | fixed calibration");
    app->add_option("--lambdas", lambdas, "monotonicity: increasing lambda grid");
    app->add_option("--grid-resolution", grid_resolution, "monotonicity: alpha grid step");
    app->add_option("--records", records, "also write per-trial trials.csv");
  }
};

template <class Fn>
void with_generator(const DataOptions& d, Fn&& fn) {
  if (task_or_usage(d.task) == ecp::Task::regression) {
    fn(ecp::RegressionTrialGenerator(d.regression()));
  } else {
    fn(ecp::ClassificationTrialGenerator(d.classification()));
  }
}

template <class Fn>
void with_policy(const ValidateOptions& v, ecp::Task task, Fn&& fn) {
  if (v.checkpoint.empty()) {
    fn(ecp::ConstantAlphaPolicy{v.alpha});
    return;
  }
  auto loaded = ecp::load_checkpoint(v.checkpoint);
  if (loaded.first.task != task) throw UsageError("checkpoint task differs from --task");
  if (loaded.first.input_kind != ecp::PolicyInputKind::definition2) {
    throw ecp::Error(ecp::ErrorKind::invalid_argument,
                     "checkpoint uses the loo-score input, which has no test-time value");
  }
  fn(ecp::NetworkPolicy(std::move(loaded.first)));
}

void run_validate(const ValidateOptions& v, const DataOptions& d, const fs::path& out) {
  const ecp::Task task = task_or_usage(d.task);
  const ecp::CalibrationRegime regime = [&] {
    try {
      return ecp::parse_regime(v.regime);
    } catch (const ecp::Error& e) {
      throw UsageError(e.what());
    }
  }();
  json config = d.to_json("data-seed");
  config.update({{"check", v.check}, {"seed", v.seed}});

  json report;
  std::string trials_csv;
  if (v.check == "coverage" || v.check == "posthoc") {
    config.update({{"trials", v.trials}, {"regime", std::string(ecp::to_string(regime))},
                   {"records", v.records}});
    ecp::MonteCarloOptions o;
    o.trials = v.trials;
    o.seed = v.seed;
    o.n_calib = d.n_calib;
    o.regime = regime;
    o.keep_records = v.records;
    if (v.check == "coverage") {
      config["alpha"] = v.alpha;
      with_generator(d, [&](const auto& gen) {
        const auto r = ecp::mc_fixed_alpha_coverage(gen, v.alpha, o);
        report = ecp::to_json(r);
        if (v.records) trials_csv = ecp::format_trial_records_csv(r);
      });
    } else {
      if (v.checkpoint.empty()) config["alpha"] = v.alpha;
      else config["checkpoint"] = v.checkpoint;
      with_generator(d, [&](const auto& gen) {
        with_policy(v, task, [&](const auto& policy) {
          const auto r = ecp::mc_posthoc_validity(gen, policy, o);
          report = ecp::to_json(r);
          report["bound"] = 1.0 + 3.0 * r.ratio_se;
          report["holds"] = r.mean_ratio <= 1.0 + 3.0 * r.ratio_se;
          if (v.records) trials_csv = ecp::format_trial_records_csv(r);
        });
      });
    }
  } else if (v.check == "size-consistency") {
    ecp::SizeConsistencyOptions o;
    o.ns.clear();
    for (double n : parse_list(v.ns)) {
      if (!(n >= 3) || n != std::floor(n)) throw UsageError("--ns entries must be integers >= 3");
      o.ns.push_back(static_cast<std::size_t>(n));
    }
    o.reps = v.reps;
    o.trials = v.trials;
    o.seed = v.seed;
    o.regime = regime;
    config.update({{"ns", v.ns}, {"reps", v.reps}, {"trials", v.trials},
                   {"regime", std::string(ecp::to_string(regime))}});
    if (v.checkpoint.empty()) config["alpha"] = v.alpha;
    else config["checkpoint"] = v.checkpoint;
    with_generator(d, [&](const auto& gen) {
      with_policy(v, task, [&](const auto& policy) {
        report = json::array();
        for (const auto& r : ecp::size_consistency_check(gen, policy, o)) {
          report.push_back(ecp::to_json(r));
        }
      });
    });
  } else if (v.check == "monotonicity") {
    const std::vector<double> lambdas = parse_list(v.lambdas);
    config.update({{"lambdas", v.lambdas}, {"grid-resolution", v.grid_resolution}});
    std::optional<ecp::CalibrationSet> calib;
    if (!v.calib.empty()) {
      config["calib"] = v.calib;
      calib = load_calibration(v.calib, task);
    } else {
      with_generator(d, [&](const auto& gen) { calib = gen.calibration(v.seed, d.n_calib); });
    }
    report = ecp::to_json(ecp::monotonicity_check(*calib, lambdas, v.grid_resolution));
  } else {
    throw UsageError("unknown --check '" + v.check + "'");
  }

  json m = manifest("validate", config);
  m["report"] = report;
  write_json(out / "validate.json", m);
  if (!trials_csv.empty()) ecp::write_text_file(out / "trials.csv", trials_csv);
}

// --- report ------------------------------------------------------------------

void run_report(const std::string& curves, std::size_t window, const fs::path& out) {
  const std::string smoothed = ecp::smooth_curves_csv(ecp::read_text_file(curves), window);
  ecp::write_text_file(out / "smoothed.csv", smoothed);
  write_json(out / "report.json",
             manifest("report", {{"curves", curves}, {"smooth-window", window}}));
}

// --- argument plumbing -------------------------------------------------------

/// Turns the config stored in an artifact into "--key value" pairs placed
/// ahead of the user's own arguments.
std::vector<std::string> replay_args(const std::string& path, const std::string& command) {
  json j;
  try {
    j = json::parse(ecp::read_text_file(path));
  } catch (const json::exception& e) {
    throw ecp::Error(ecp::ErrorKind::corrupt_file, "'" + path + "': " + e.what());
  }
  const json& config = j.contains("config") ? j.at("config") : j;
  if (!config.is_object() || config.value("command", "") != command) {
    throw UsageError("'" + path + "' holds no config for '" + command + "'");
  }
  std::vector<std::string> args;
  for (const auto& [key, value] : config.items()) {
    if (key == "command") continue;
    args.push_back("--" + key);
    args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return args;
}

int run(int argc, char** argv) {
  CLI::App app{"Adaptive-coverage conformal prediction with e-values"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string out;
  std::string config_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--config", config_path, "replay the config embedded in an artifact");
  };

  DataOptions gen_data;
  auto* gen = app.add_subcommand("gen", "write synthetic calibration and test data");
  gen_data.add(gen, "--seed");
  common(gen);

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "train a coverage policy");
  train_opts.add(train, true);
  common(train);

  TrainOptions search_train;
  SearchOptions search_opts;
  auto* search = app.add_subcommand("select-lambda", "search lambda for a target mean size");
  search_train.add(search, false);
  search_opts.add(search);
  common(search);

  std::string ckpt;
  std::string pred_calib;
  std::string pred_test;
  auto* predict = app.add_subcommand("predict", "per-row alpha and conformal set");
  predict->add_option("--checkpoint", ckpt, "trained policy")->required();
  predict->add_option("--calib", pred_calib, "calibration scores CSV")->required();
  predict->add_option("--test", pred_test, "test CSV")->required();
  common(predict);

  ValidateOptions val_opts;
  DataOptions val_data;
  auto* validate = app.add_subcommand("validate", "Monte Carlo checks of the guarantees");
  val_opts.add(validate);
  val_data.add(validate, "--data-seed");
  common(validate);

  std::string curves;
  std::size_t window = 50;
  auto* report = app.add_subcommand("report", "moving-average smoothing of a curves CSV");
  report->add_option("--curves", curves, "curves CSV (first column is the x axis)")->required();
  report->add_option("--smooth-window", window, "moving-average window");
  common(report);

  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      const auto extra = replay_args(args[i + 1], args[0]);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
      break;
    }
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const fs::path out_dir(out);
  if (*gen) run_gen(gen_data, out_dir);
  else if (*train) run_train(train_opts, out_dir);
  else if (*search) run_select_lambda(search_train, search_opts, out_dir);
  else if (*predict) run_predict(ckpt, pred_calib, pred_test, out_dir);
  else if (*validate) run_validate(val_opts, val_data, out_dir);
  else if (*report) run_report(curves, window, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ecp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
