#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ecp/lambda_search.hpp"
#include "test_util.hpp"

namespace ecp {
namespace {

using testing::expect_error;

std::vector<std::pair<double, double>> points(const SearchTrace& t) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : t.steps) out.emplace_back(s.lambda, s.mean_size);
  return out;
}

TEST(SelectLambda, LinearMockTrace) {
  LambdaSearchConfig cfg;
  cfg.target_size = 2.0;
  cfg.tolerance = 0.1;
  cfg.initial_lambda = 10.0;
  const auto t = select_lambda([](double l) { return l / 20.0; }, cfg);
  const std::vector<std::pair<double, double>> expected{
      {10, 0.5}, {20, 1.0}, {40, 2.0}, {30, 1.5}, {35, 1.75}, {37.5, 1.875}, {38.75, 1.9375}};
  EXPECT_EQ(points(t), expected);
  EXPECT_EQ(t.lambda_m, 38.75);
  EXPECT_TRUE(t.converged);
  const std::vector<SearchPhase> phases{SearchPhase::expand, SearchPhase::expand,
                                        SearchPhase::expand, SearchPhase::bisect,
                                        SearchPhase::bisect, SearchPhase::bisect,
                                        SearchPhase::bisect};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    EXPECT_EQ(t.steps[i].phase, phases[i]);
    EXPECT_EQ(t.steps[i].iteration, i);
  }
}

TEST(SelectLambda, SingleExpansionThenBisectShape) {
  LambdaSearchConfig cfg;
  cfg.initial_lambda = 40.0;
  const auto t = select_lambda([](double l) { return l / 32.5; }, cfg);
  std::vector<double> lambdas;
  for (const auto& s : t.steps) lambdas.push_back(s.lambda);
  EXPECT_EQ(lambdas, (std::vector<double>{40, 80, 60, 70, 65}));
  EXPECT_NEAR(t.steps.back().mean_size, 2.0, 1e-12);
}

TEST(SelectLambda, ImmediateHit) {
  LambdaSearchConfig cfg;
  const auto t = select_lambda([](double) { return 2.05; }, cfg);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].phase, SearchPhase::expand);
  EXPECT_EQ(t.steps[0].iteration, 0u);
  EXPECT_EQ(t.lambda_m, cfg.initial_lambda);
  EXPECT_TRUE(t.converged);
}

TEST(SelectLambda, UnreachableTargetHasNoBracket) {
  LambdaSearchConfig cfg;
  cfg.max_expansions = 60;
  int calls = 0;
  expect_error(ErrorKind::no_bracket, [&] {
    select_lambda([&](double) { ++calls; return 5.0; }, cfg);
  });
  EXPECT_EQ(calls, 61);
}

TEST(SelectLambda, DownwardExpansion) {
  LambdaSearchConfig cfg;
  cfg.initial_lambda = 1000.0;
  const auto t = select_lambda([](double l) { return l / 20.0; }, cfg);
  EXPECT_EQ(t.steps[1].lambda, 500.0);
  EXPECT_EQ(t.steps[1].phase, SearchPhase::expand);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(std::abs(t.steps.back().mean_size - 2.0), 0.1);
}

TEST(SelectLambda, StepFunctionDoesNotConverge) {
  LambdaSearchConfig cfg;
  cfg.max_bisections = 10;
  const auto t = select_lambda([](double l) { return l < 25.0 ? 1.0 : 3.0; }, cfg);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.steps.size(), 3u + 10u);
  // Both plateaus are 1.0 away from the target; the first one seen wins.
  EXPECT_EQ(t.lambda_m, 10.0);
}

TEST(SelectLambda, SeedsDerivedFromMasterAndIteration) {
  LambdaSearchConfig cfg;
  cfg.master_seed = 1234;
  std::vector<std::uint64_t> seen;
  const auto t = select_lambda(
      [&](double l, std::uint64_t seed) {
        seen.push_back(seed);
        return l / 20.0;
      },
      cfg);
  ASSERT_EQ(seen.size(), t.steps.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i], mix_seed(1234, i));
    EXPECT_EQ(t.steps[i].seed, seen[i]);
  }
}

TEST(SelectLambda, BracketInvariantOnRandomMonotoneMocks) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const double scale = std::pow(10.0, 4.0 * u(rng) - 2.0);
    const double power = 0.3 + 2.0 * u(rng);
    const double floor = 0.5 * u(rng);
    auto size = [=](double l) { return floor + std::pow(l / scale, power); };
    LambdaSearchConfig cfg;
    cfg.target_size = 1.0 + 3.0 * u(rng);
    cfg.tolerance = 0.01 + 0.1 * u(rng);
    cfg.initial_lambda = std::pow(10.0, 4.0 * u(rng) - 2.0);
    const auto t = select_lambda(size, cfg);
    ASSERT_TRUE(t.converged) << rep;
    ASSERT_LE(std::abs(t.steps.back().mean_size - cfg.target_size), cfg.tolerance);
    EXPECT_EQ(t.lambda_m, t.steps.back().lambda);

    // Replay the bisection and check the bracket after every step.
    std::size_t first_bisect = 0;
    while (first_bisect < t.steps.size() && t.steps[first_bisect].phase == SearchPhase::expand) {
      ++first_bisect;
    }
    if (first_bisect == t.steps.size()) continue;
    const auto& a = t.steps[first_bisect - 2];
    const auto& b = t.steps[first_bisect - 1];
    SearchStep low = a.lambda < b.lambda ? a : b;
    SearchStep high = a.lambda < b.lambda ? b : a;
    ASSERT_LT(low.mean_size, cfg.target_size);
    ASSERT_GE(high.mean_size, cfg.target_size);
    double width = high.lambda - low.lambda;
    for (std::size_t i = first_bisect; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      ASSERT_EQ(s.lambda, 0.5 * (low.lambda + high.lambda));
      (s.mean_size < cfg.target_size ? low : high) = s;
      ASSERT_NEAR(high.lambda - low.lambda, 0.5 * width, 1e-12 * width);
      width = high.lambda - low.lambda;
      if (i + 1 < t.steps.size()) {
        ASSERT_LT(low.mean_size, cfg.target_size);
        ASSERT_GE(high.mean_size, cfg.target_size);
      }
    }
  }
}

TEST(SelectLambda, ConfigValidation) {
  LambdaSearchConfig cfg;
  cfg.tolerance = 0.0;
  expect_error(ErrorKind::invalid_argument, [&] { select_lambda([](double) { return 1.0; }, cfg); });
}

TEST(TrainingEvaluator, RetrainsPerLambdaWithDerivedSeed) {
  SyntheticRegressionSpec spec;
  spec.seed = 2;
  const auto c = CalibrationSet::regression(gen_synthetic_regression(spec).calib_scores());
  TrainConfig base = TrainConfig::defaults_for(Task::regression);
  base.epochs = 40;
  TrainingEvaluator eval(c, base);
  LambdaSearchConfig cfg;
  cfg.target_size = 6.0;
  cfg.tolerance = 0.5;
  cfg.master_seed = 5;
  const auto t = select_lambda(eval, cfg);
  ASSERT_EQ(eval.runs().size(), t.steps.size());
  for (const auto& s : t.steps) {
    const auto& run = eval.run_for(s);
    EXPECT_EQ(run.report.config.seed, mix_seed(5, s.iteration));
    EXPECT_EQ(run.report.loo_mean_size, s.mean_size);
  }
}

}  // namespace
}  // namespace ecp
