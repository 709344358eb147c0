#pragma once

// JSON and CSV forms of the training, search and evaluation reports, plus the
// moving-average smoother used for plot data.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ecp/csv_table.hpp"
#include "ecp/error.hpp"
#include "ecp/evaluation.hpp"
#include "ecp/file_io.hpp"
#include "ecp/lambda_search.hpp"
#include "ecp/trainer.hpp"

namespace ecp {

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},
          {"k", c.k},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"hidden_dim", c.hidden_dim},
          {"init_output_near_one", c.init_output_near_one},
          {"policy_input", std::string(to_string(c.input_kind))}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.lambda = j.at("lambda").get<double>();
    c.k = j.at("k").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.init_output_near_one = j.at("init_output_near_one").get<bool>();
    c.input_kind = parse_policy_input(j.at("policy_input").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_file, std::string("train config: ") + e.what());
  }
}

/// Wall time is left out so that reruns serialize identically.
inline nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json loss = nlohmann::json::array();
  nlohmann::json size = nlohmann::json::array();
  nlohmann::json surrogate = nlohmann::json::array();
  nlohmann::json alpha = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    loss.push_back(e.loss);
    size.push_back(e.mean_size);
    surrogate.push_back(e.mean_surrogate_size);
    alpha.push_back(e.mean_alpha);
  }
  return {{"task", std::string(to_string(r.task))},
          {"n_calib", r.n_calib},
          {"train_config", to_json(r.config)},
          {"epochs", r.epochs.size()},
          {"loss", loss},
          {"mean_size", size},
          {"mean_surrogate_size", surrogate},
          {"mean_alpha", alpha},
          {"loo_mean_size", r.loo_mean_size}};
}

inline std::string format_epoch_curves_csv(const TrainReport& r) {
  std::string out = "epoch,loss,mean_size,mean_alpha\n";
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    const auto& e = r.epochs[i];
    out += std::to_string(i) + "," + format_double(e.loss) + "," + format_double(e.mean_size) +
           "," + format_double(e.mean_alpha) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const LambdaSearchConfig& c) {
  return {{"target_size", c.target_size},         {"tolerance", c.tolerance},
          {"initial_lambda", c.initial_lambda},   {"max_expansions", c.max_expansions},
          {"max_bisections", c.max_bisections},   {"master_seed", c.master_seed}};
}

inline nlohmann::json to_json(const SearchTrace& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"iter", s.iteration},
                     {"phase", std::string(to_string(s.phase))},
                     {"lambda", s.lambda},
                     {"mean_size", s.mean_size},
                     {"seed", s.seed}});
  }
  return {{"steps", steps}, {"lambda_m", t.lambda_m}, {"converged", t.converged}};
}

inline std::string format_search_trace_csv(const SearchTrace& t) {
  std::string out = "iter,phase,lambda,mean_size\n";
  for (const auto& s : t.steps) {
    out += std::to_string(s.iteration) + "," + std::string(to_string(s.phase)) + "," +
           format_double(s.lambda) + "," + format_double(s.mean_size) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const CoverageReport& r) {
  return {{"trials", r.trials},
          {"n_calib", r.n_calib},
          {"regime", std::string(to_string(r.regime))},
          {"miss_rate", r.miss_rate},
          {"miss_rate_se", r.miss_rate_se},
          {"mean_ratio", r.mean_ratio},
          {"ratio_se", r.ratio_se},
          {"mean_alpha", r.mean_alpha},
          {"mean_size", r.mean_size}};
}

inline std::string format_trial_records_csv(const CoverageReport& r) {
  std::string out = "trial,alpha,miss,size\n";
  for (const auto& t : r.records) {
    out += std::to_string(t.trial) + "," + format_double(t.alpha) + "," + (t.miss ? "1" : "0") +
           "," + format_double(t.size) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const SizeConsistencyReport& r) {
  return {{"n", r.n},
          {"reps", r.reps},
          {"trials", r.trials},
          {"regime", std::string(to_string(r.regime))},
          {"loo_mean_size", r.loo_mean_size},
          {"mc_expected_test_size", r.mc_expected_test_size},
          {"abs_gap", r.abs_gap},
          {"rel_gap", r.rel_gap},
          {"median_abs_gap", r.median_abs_gap},
          {"empirical_mean_score", r.empirical_mean_score},
          {"loo_sizes", r.loo_sizes},
          {"test_sizes", r.test_sizes},
          {"gaps", r.gaps}};
}

inline nlohmann::json to_json(const MonotonicityReport& r) {
  return {{"lambdas", r.lambdas},
          {"alphas", r.alphas},
          {"sizes", r.sizes},
          {"is_monotone", r.is_monotone}};
}

/// Trailing mean over the last `window` values; the first entries average
/// whatever is available.
inline std::vector<double> moving_average(std::span<const double> xs, std::size_t window) {
  if (window == 0) throw Error(ErrorKind::invalid_argument, "smoothing window must be >= 1");
  std::vector<double> out(xs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    running += xs[i];
    if (i >= window) running -= xs[i - window];
    out[i] = running / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

/// Smooths every numeric column of a curves CSV except the first (the x
/// axis). Non-numeric columns are copied through.
inline std::string smooth_curves_csv(std::string_view text, std::size_t window) {
  CsvTable table = parse_csv_table(text);
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (!table.numeric_column(c)) continue;
    const std::vector<double> col = table.column(c);
    const std::vector<double> smoothed = moving_average(col, window);
    for (std::size_t r = 0; r < table.rows.size(); ++r) table.rows[r][c] = format_double(smoothed[r]);
  }
  return format_csv_table(table);
}

}  // namespace ecp
