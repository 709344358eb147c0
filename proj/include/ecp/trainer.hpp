#pragma once

// Leave-one-out training of a coverage policy.
//
// Episode j treats calibration point j as a pseudo test point and the other
// n - 1 points as its calibration set. The policy is trained on
//   loss_j = Size(C_{n-1}^{alpha_j}(X_j)) + lambda * alpha_j
// using the sigmoid-smoothed size for classification and the closed-form
// interval length for regression.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ecp/conformal.hpp"
#include "ecp/error.hpp"
#include "ecp/parallel.hpp"
#include "ecp/policy.hpp"
#include "ecp/scores.hpp"

namespace ecp {

struct TrainConfig {
  double lambda = 50.0;
  double k = 100.0;  // classification sigmoid sharpness
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
  std::size_t hidden_dim = 32;
  bool init_output_near_one = false;
  PolicyInputKind input_kind = PolicyInputKind::definition2;

  static TrainConfig defaults_for(Task task) {
    TrainConfig c;
    if (task == Task::regression) {
      c.batch_size = 32;
      c.epochs = 200;
      c.init_output_near_one = true;
    }
    return c;
  }

  void validate(std::size_t n) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorKind::invalid_argument, "lambda must be finite and > 0");
    }
    if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be > 0");
    if (!(lr > 0.0)) throw Error(ErrorKind::invalid_argument, "lr must be > 0");
    if (batch_size < 1 || batch_size > n) {
      throw Error(ErrorKind::invalid_argument, "batch size must lie in 1..n (n = " +
                                                   std::to_string(n) + ")");
    }
    if (hidden_dim < 1) throw Error(ErrorKind::invalid_argument, "hidden_dim must be >= 1");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Episode {
  std::size_t index = 0;
  double loo_sum = 0.0;
  std::size_t loo_count = 0;
  double held_out_score = 0.0;
  const CandidateScores* candidates = nullptr;  // classification only

  ScoreSummary summary() const noexcept { return {loo_sum, loo_count}; }

  PolicyInput input() const {
    PolicyInput in;
    in.calib_sum = loo_sum;
    in.calib_count = loo_count;
    if (candidates) in.test_stat = candidates->values();
    in.loo_score = held_out_score;
    return in;
  }
};

/// Episodes view into `calib`, which must outlive them.
inline std::vector<Episode> build_loo_episodes(const CalibrationSet& calib) {
  const std::size_t n = calib.size();
  if (n < 3) throw Error(ErrorKind::too_few, "leave-one-out needs n >= 3", n);
  const double total = calib.scores.sum();
  std::vector<Episode> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j].index = j;
    out[j].held_out_score = calib.scores[j];
    out[j].loo_sum = std::max(0.0, total - calib.scores[j]);
    out[j].loo_count = n - 1;
    if (calib.task == Task::classification) out[j].candidates = &calib.candidates[j];
  }
  return out;
}

/// Exact size of an episode's set at a given alpha.
inline double episode_exact_size(const Episode& ep, const Alpha& alpha) {
  if (ep.candidates) {
    return static_cast<double>(classification_set_size(ep.summary(), *ep.candidates, alpha));
  }
  return regression_size(ep.summary(), alpha).size;
}

struct EpisodeEval {
  double loss = 0.0;
  double surrogate_size = 0.0;
  double exact_size = 0.0;
  double alpha = 0.0;
  PolicyWeights grad;
};

inline EpisodeEval episode_loss_with_grad(const PolicyParams& params, const Episode& ep,
                                          const TrainConfig& cfg) {
  auto [alpha, cache] = policy_forward(params, ep.input());
  SizeWithSlope surrogate;
  if (ep.candidates) {
    surrogate = classification_size_smooth(ep.summary(), *ep.candidates, alpha, {cfg.k});
  } else {
    surrogate = regression_size(ep.summary(), alpha);
  }
  EpisodeEval out;
  out.alpha = alpha.value();
  out.surrogate_size = surrogate.size;
  out.exact_size = episode_exact_size(ep, alpha);
  out.loss = surrogate.size + cfg.lambda * alpha.value();
  out.grad = policy_backward(params, cache, surrogate.dsize_dalpha + cfg.lambda);
  return out;
}

struct EpochMetrics {
  double loss = 0.0;
  double mean_size = 0.0;  // exact
  double mean_surrogate_size = 0.0;
  double mean_alpha = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainReport {
  Task task = Task::regression;
  std::size_t n_calib = 0;
  TrainConfig config;
  std::vector<EpochMetrics> epochs;
  double loo_mean_size = 0.0;
  double wall_seconds = 0.0;  // informational, excluded from equality

  friend bool operator==(const TrainReport& a, const TrainReport& b) {
    return a.task == b.task && a.n_calib == b.n_calib && a.config == b.config &&
           a.epochs == b.epochs && a.loo_mean_size == b.loo_mean_size;
  }
};

struct LooSummary {
  double mean_size = 0.0;
  double mean_alpha = 0.0;
};

/// Mean exact leave-one-out set size (and mean alpha) under any policy.
template <CoveragePolicy Policy>
LooSummary loo_summary(const Policy& policy, const CalibrationSet& calib) {
  const auto episodes = build_loo_episodes(calib);
  LooSummary out;
  for (const auto& ep : episodes) {
    const Alpha a = policy(ep.input());
    out.mean_size += episode_exact_size(ep, a);
    out.mean_alpha += a.value();
  }
  out.mean_size /= static_cast<double>(episodes.size());
  out.mean_alpha /= static_cast<double>(episodes.size());
  return out;
}

template <CoveragePolicy Policy>
double loo_mean_size(const Policy& policy, const CalibrationSet& calib) {
  return loo_summary(policy, calib).mean_size;
}

inline double loo_mean_size(const PolicyParams& params, const CalibrationSet& calib) {
  return loo_mean_size(NetworkPolicy(params), calib);
}

/// Policy with its input normalizer fitted on the episode features, before
/// any training step.
inline PolicyParams initial_policy(const CalibrationSet& calib, const std::vector<Episode>& episodes,
                                   const TrainConfig& cfg) {
  std::vector<std::vector<double>> rows;
  rows.reserve(episodes.size());
  for (const auto& ep : episodes) rows.push_back(raw_features(ep.input(), cfg.input_kind));
  PolicyParams p = init_policy(calib.task, rows.front().size(), cfg.hidden_dim, calib.size(),
                               cfg.seed, cfg.init_output_near_one);
  p.input_kind = cfg.input_kind;
  p.normalizer = Normalizer::fit(rows);
  return p;
}

struct TrainResult {
  PolicyParams params;
  TrainReport report;
};

inline TrainResult train_policy(const CalibrationSet& calib, const TrainConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = calib.size();
  cfg.validate(n);
  const auto episodes = build_loo_episodes(calib);

  TrainResult out{initial_policy(calib, episodes, cfg), {}};
  PolicyParams& params = out.params;
  TrainReport& report = out.report;
  report.task = calib.task;
  report.n_calib = n;
  report.config = cfg;
  report.epochs.reserve(cfg.epochs);

  AdamState adam = AdamState::for_params(params.weights, cfg.lr);
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> batch;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochMetrics m;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      // Gradients are summed in episode-index order.
      std::sort(batch.begin(), batch.end());
      PolicyWeights grad = PolicyWeights::zeros(params.input_dim(), params.hidden_dim());
      for (std::size_t j : batch) {
        const EpisodeEval e = episode_loss_with_grad(params, episodes[j], cfg);
        if (!std::isfinite(e.loss)) {
          throw Error(ErrorKind::non_finite_loss,
                      "epoch " + std::to_string(epoch) + ", episode " + std::to_string(j) +
                          ": loss " + std::to_string(e.loss) + " at alpha " +
                          std::to_string(e.alpha));
        }
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += e.grad[i];
        m.loss += e.loss;
        m.mean_size += e.exact_size;
        m.mean_surrogate_size += e.surrogate_size;
        m.mean_alpha += e.alpha;
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= inv;
      adam_step(params.weights, grad, adam);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    m.loss *= inv_n;
    m.mean_size *= inv_n;
    m.mean_surrogate_size *= inv_n;
    m.mean_alpha *= inv_n;
    report.epochs.push_back(m);
  }

  report.loo_mean_size = loo_mean_size(params, calib);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace ecp
