#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ecp/report.hpp"
#include "ecp/trainer.hpp"
#include "test_util.hpp"

namespace ecp {
namespace {

using testing::calib;
using testing::expect_error;

CalibrationSet regression_calib(std::uint64_t seed, std::size_t n = 100) {
  SyntheticRegressionSpec spec;
  spec.seed = seed;
  spec.n_calib = n;
  return CalibrationSet::regression(gen_synthetic_regression(spec).calib_scores());
}

CalibrationSet classification_calib(std::uint64_t seed, std::size_t n = 100, std::size_t k = 10) {
  SyntheticClassificationSpec spec;
  spec.seed = seed;
  spec.n_calib = n;
  spec.n_classes = k;
  return CalibrationSet::classification(gen_synthetic_classification(spec).calib);
}

TEST(LooEpisodes, Sums) {
  const auto c = CalibrationSet::regression(calib({1, 2, 3}));
  const auto eps = build_loo_episodes(c);
  ASSERT_EQ(eps.size(), 3u);
  EXPECT_EQ(eps[0].loo_sum, 5.0);
  EXPECT_EQ(eps[1].loo_sum, 4.0);
  EXPECT_EQ(eps[2].loo_sum, 3.0);
  for (const auto& e : eps) EXPECT_EQ(e.loo_count, 2u);
}

TEST(LooEpisodes, EqualScores) {
  for (std::size_t n : {3u, 10u, 257u}) {
    const auto c = CalibrationSet::regression(calib(std::vector<double>(n, 0.5)));
    for (const auto& e : build_loo_episodes(c)) EXPECT_EQ(e.loo_sum, 0.5 * static_cast<double>(n - 1));
  }
}

TEST(LooEpisodes, Reconstruction) {
  const auto c = classification_calib(4, 300);
  const auto eps = build_loo_episodes(c);
  std::vector<std::size_t> idx;
  for (const auto& e : eps) {
    EXPECT_NEAR(e.loo_sum + e.held_out_score, c.scores.sum(), 1e-9);
    EXPECT_EQ(e.held_out_score, c.scores[e.index]);
    EXPECT_EQ(e.candidates, &c.candidates[e.index]);
    idx.push_back(e.index);
  }
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], i);
}

TEST(LooEpisodes, TooFew) {
  expect_error(ErrorKind::too_few,
               [] { build_loo_episodes(CalibrationSet::regression(calib({1, 2}))); });
}

TEST(LooMeanSize, ClosedFormAllOnes) {
  const auto c = CalibrationSet::regression(calib(std::vector<double>(100, 1.0)));
  const double loo = loo_mean_size(ConstantAlphaPolicy{0.5}, c);
  EXPECT_NEAR(loo, 198.0 / 49.0, 1e-12);
  const double test = regression_size(c.scores, Alpha(0.5)).size;
  EXPECT_NEAR(test, 200.0 / 49.5, 1e-12);
  EXPECT_NEAR(std::abs(loo - test), 198.0 / 49.0 - 200.0 / 49.5, 1e-12);
  EXPECT_NEAR(std::abs(loo - test), 4.2e-4, 1e-5);
}

TEST(LooMeanSize, TinyAlphaGivesFullClassificationSets) {
  const auto c = classification_calib(1, 100, 7);
  EXPECT_EQ(loo_mean_size(ConstantAlphaPolicy{0.005}, c), 7.0);
}

TEST(LooMeanSize, RegressionBelowOneOverNThrows) {
  const auto c = regression_calib(1, 50);
  expect_error(ErrorKind::alpha_too_small, [&] { loo_mean_size(ConstantAlphaPolicy{0.01}, c); });
}

TEST(EpisodeLoss, ZeroLambdaPushesAlphaUp) {
  const auto c = regression_calib(2);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.lambda = 0.0;
  const auto eps = build_loo_episodes(c);
  const PolicyParams p = initial_policy(c, eps, cfg);
  for (const auto& e : eps) {
    const EpisodeEval ev = episode_loss_with_grad(p, e, cfg);
    EXPECT_LT(ev.grad.b2, 0.0);
    EXPECT_EQ(ev.loss, ev.surrogate_size);
  }
}

TEST(EpisodeLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  int draws = 0;
  for (std::uint64_t seed = 0; draws < 100; ++seed) {
    const bool cls = seed % 2 == 1;
    const auto c = cls ? classification_calib(seed, 30, 5) : regression_calib(seed, 30);
    TrainConfig cfg = TrainConfig::defaults_for(c.task);
    cfg.lambda = 0.5 + 20.0 * std::abs(g(rng));
    cfg.hidden_dim = 8;
    cfg.seed = seed;
    const auto eps = build_loo_episodes(c);
    PolicyParams p = initial_policy(c, eps, cfg);
    for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] += 0.3 * g(rng);
    const Episode& ep = eps[seed % eps.size()];
    const auto [a, cache] = policy_forward(p, ep.input());
    bool near_kink = false;
    for (double pre : cache.pre) near_kink = near_kink || std::abs(pre) < 1e-3;
    if (near_kink) continue;
    ++draws;
    const EpisodeEval ev = episode_loss_with_grad(p, ep, cfg);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      const double fd = testing::central_difference(
          [&](double d) {
            PolicyParams q = p;
            q.weights[i] += d;
            return episode_loss_with_grad(q, ep, cfg).loss;
          },
          1e-4);
      const double err = testing::rel_err(fd, ev.grad[i]);
      ASSERT_LE(err, 1e-5) << (cls ? "classification" : "regression") << " seed " << seed
                           << " param " << i << " fd " << fd << " analytic " << ev.grad[i];
    }
  }
}

TEST(TrainPolicy, ZeroEpochsKeepsInitialParams) {
  const auto c = regression_calib(3);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.epochs = 0;
  cfg.seed = 12;
  const auto r = train_policy(c, cfg);
  EXPECT_EQ(r.params, initial_policy(c, build_loo_episodes(c), cfg));
  EXPECT_TRUE(r.report.epochs.empty());
}

TEST(TrainPolicy, ReportShapeAndLossDecomposition) {
  const auto c = classification_calib(3, 80, 6);
  TrainConfig cfg = TrainConfig::defaults_for(Task::classification);
  cfg.epochs = 25;
  cfg.batch_size = 16;
  cfg.lambda = 3.0;
  const auto r = train_policy(c, cfg);
  ASSERT_EQ(r.report.epochs.size(), 25u);
  for (const auto& e : r.report.epochs) {
    EXPECT_NEAR(e.loss, e.mean_surrogate_size + cfg.lambda * e.mean_alpha, 1e-9);
    EXPECT_GE(e.mean_size, 0.0);
    EXPECT_LE(e.mean_size, 6.0);
  }
  EXPECT_NEAR(r.report.loo_mean_size, loo_mean_size(r.params, c), 0.0);
}

TEST(TrainPolicy, Deterministic) {
  const auto c = regression_calib(8);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.epochs = 30;
  cfg.seed = 77;
  const auto a = train_policy(c, cfg);
  const auto b = train_policy(c, cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(to_json(a.report).dump(), to_json(b.report).dump());
  cfg.seed = 78;
  EXPECT_NE(train_policy(c, cfg).params, a.params);
}

TEST(TrainPolicy, BatchSizeAboveNRejected) {
  const auto c = regression_calib(8, 20);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  expect_error(ErrorKind::invalid_argument, [&] { train_policy(c, cfg); });
}

TEST(TrainPolicy, SmoothedLossNonIncreasing) {
  const auto c = regression_calib(0);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.lambda = 50.0;
  cfg.seed = 1;
  const auto r = train_policy(c, cfg);
  std::vector<double> loss;
  for (const auto& e : r.report.epochs) loss.push_back(e.loss);
  std::vector<double> smooth;
  for (std::size_t i = 10; i <= loss.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i - 10; j < i; ++j) s += loss[j];
    smooth.push_back(s / 10.0);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) {
    EXPECT_LE(smooth[i], smooth[i - 1] + 1e-12) << "window ending at epoch " << i + 9;
  }
  EXPECT_LT(loss.back(), loss.front());
}

TEST(TrainPolicy, LargerLambdaGivesSmallerAlpha) {
  const auto c = regression_calib(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
    cfg.seed = seed;
    double previous = 2.0;
    for (double lambda : {5.0, 20.0, 100.0}) {
      cfg.lambda = lambda;
      const double a = train_policy(c, cfg).report.epochs.back().mean_alpha;
      EXPECT_LE(a, previous) << "seed " << seed << " lambda " << lambda;
      previous = a;
    }
  }
}

TEST(TrainPolicy, NonFiniteLossAborts) {
  std::vector<double> huge(10, 1.5e307);
  const auto c = CalibrationSet::regression(calib(huge));
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.batch_size = 5;
  cfg.epochs = 2;
  expect_error(ErrorKind::non_finite_loss, [&] { train_policy(c, cfg); });
}

TEST(TrainPolicy, LooScoreVariantTrains) {
  const auto c = regression_calib(6);
  TrainConfig cfg = TrainConfig::defaults_for(Task::regression);
  cfg.input_kind = PolicyInputKind::loo_score;
  cfg.epochs = 20;
  const auto r = train_policy(c, cfg);
  EXPECT_EQ(r.params.input_dim(), 2u);
  EXPECT_EQ(r.params.input_kind, PolicyInputKind::loo_score);
  EXPECT_TRUE(std::isfinite(r.report.loo_mean_size));
}

}  // namespace
}  // namespace ecp
