#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ecp/scores.hpp"
#include "test_util.hpp"

namespace ecp {
namespace {

using testing::expect_error;

TEST(CalibScores, CachesSumAndCount) {
  const auto s = validate_calib_scores(std::vector<double>{1, 2, 3});
  EXPECT_EQ(s.sum(), 6.0);
  EXPECT_EQ(s.count(), 3u);
  EXPECT_EQ(s.mean(), 2.0);
  EXPECT_EQ(s.min(), 1.0);
  EXPECT_EQ(s.max(), 3.0);
}

TEST(CalibScores, ZerosAllowed) {
  const auto s = validate_calib_scores(std::vector<double>{0, 0});
  EXPECT_EQ(s.sum(), 0.0);
  EXPECT_EQ(s.count(), 2u);
}

TEST(CalibScores, Rejections) {
  expect_error(ErrorKind::negative_score,
               [] { validate_calib_scores(std::vector<double>{1, -0.5}); }, 1);
  expect_error(ErrorKind::too_few, [] { validate_calib_scores(std::vector<double>{1}); }, 1);
  expect_error(ErrorKind::non_finite, [] {
    validate_calib_scores(std::vector<double>{1, 2, std::numeric_limits<double>::quiet_NaN()});
  }, 2);
  expect_error(ErrorKind::non_finite, [] {
    validate_calib_scores(std::vector<double>{std::numeric_limits<double>::infinity(), 0});
  }, 0);
}

TEST(CalibScores, SumWithinAccumulationTolerance) {
  std::mt19937_64 rng(3);
  const auto raw = testing::uniform_scores(rng, 1000);
  const auto s = validate_calib_scores(raw);
  long double exact = 0.0L;
  for (double v : raw) exact += v;
  EXPECT_LE(std::abs(static_cast<long double>(s.sum()) - exact), 1e-9L * 1000);
}

TEST(CandidateScores, NeedsTwoClassesAndNonnegative) {
  expect_error(ErrorKind::too_few, [] { testing::cands({0.3}); });
  expect_error(ErrorKind::negative_score, [] { testing::cands({0.3, -1}); }, 1);
}

TEST(CalibrationSet, ClassificationLabelChecks) {
  std::vector<LabeledCandidates> rows{{testing::cands({0.2, 0.9}), 1},
                                      {testing::cands({0.1, 0.3}), 0}};
  const auto c = CalibrationSet::classification(rows);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.n_classes(), 2u);
  EXPECT_EQ(c.scores[0], 0.9);
  EXPECT_EQ(c.scores[1], 0.1);

  rows[1].label = -1;
  expect_error(ErrorKind::schema_mismatch, [&] { CalibrationSet::classification(rows); }, 1);
  rows[1] = {testing::cands({0.1, 0.3, 0.4}), 0};
  expect_error(ErrorKind::schema_mismatch, [&] { CalibrationSet::classification(rows); }, 1);
}

TEST(MaeScore, Examples) {
  EXPECT_EQ(mae_score(10, 10), 0.0);
  EXPECT_EQ(mae_score(10, 7.5), 2.5);
  EXPECT_EQ(mae_score(-3, 4), 7.0);
  expect_error(ErrorKind::non_finite,
               [] { mae_score(std::numeric_limits<double>::infinity(), 0); });
}

TEST(RegressionSample, ScoreOnlyWithLabel) {
  EXPECT_FALSE(RegressionSample::make(1.0).score.has_value());
  EXPECT_EQ(RegressionSample::make(1.0, 3.5).score, 2.5);
}

TEST(FitOls1d, Examples) {
  auto f = fit_ols_1d(std::vector<double>{0, 1}, std::vector<double>{0, 2});
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 0.0);

  f = fit_ols_1d(std::vector<double>{-1, 0, 1}, std::vector<double>{1, 1, 1});
  EXPECT_DOUBLE_EQ(f.slope, 0.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);

  f = fit_ols_1d(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 4});
  EXPECT_NEAR(f.slope, 2.0, 1e-15);
  EXPECT_NEAR(f.intercept, -1.0 / 3.0, 1e-15);
}

TEST(FitOls1d, Errors) {
  expect_error(ErrorKind::degenerate_x,
               [] { fit_ols_1d(std::vector<double>{2, 2, 2}, std::vector<double>{0, 1, 2}); });
  expect_error(ErrorKind::too_few,
               [] { fit_ols_1d(std::vector<double>{1}, std::vector<double>{1}); });
}

TEST(SyntheticRegression, NoiselessScoresVanish) {
  SyntheticRegressionSpec spec;
  spec.noise_sd = 0.0;
  spec.seed = 11;
  const auto d = gen_synthetic_regression(spec);
  EXPECT_NEAR(d.fit.slope, 2.0, 1e-12);
  for (const auto& c : d.calib) EXPECT_LT(*c.score, 1e-9);
}

TEST(SyntheticRegression, MeanScoreIsHalfNormalMean) {
  SyntheticRegressionSpec spec;
  spec.n_calib = 40000;
  spec.n_test = 0;
  spec.seed = 5;
  const auto s = gen_synthetic_regression(spec).calib_scores();
  const double expected = std::sqrt(2.0 / std::numbers::pi);
  // sd of |eps| is sqrt(1 - 2/pi) ~ 0.603; allow 4 SE plus the OLS bias.
  const double se = std::sqrt(1.0 - 2.0 / std::numbers::pi) / std::sqrt(40000.0);
  EXPECT_NEAR(s.mean(), expected, 4 * se + 0.01);
}

TEST(SyntheticRegression, Deterministic) {
  SyntheticRegressionSpec spec;
  spec.seed = 42;
  const auto a = gen_synthetic_regression(spec);
  const auto b = gen_synthetic_regression(spec);
  EXPECT_EQ(a.train_x, b.train_x);
  EXPECT_EQ(a.train_y, b.train_y);
  ASSERT_EQ(a.calib.size(), b.calib.size());
  for (std::size_t i = 0; i < a.calib.size(); ++i) {
    EXPECT_EQ(a.calib[i].prediction, b.calib[i].prediction);
    EXPECT_EQ(a.calib[i].score, b.calib[i].score);
  }
  spec.seed = 43;
  EXPECT_NE(gen_synthetic_regression(spec).train_x, a.train_x);
}

TEST(SyntheticRegression, ScoresFiniteNonnegative) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticRegressionSpec spec;
    spec.seed = seed;
    const auto d = gen_synthetic_regression(spec);
    for (const auto& c : d.calib) {
      ASSERT_TRUE(std::isfinite(*c.score));
      ASSERT_GE(*c.score, 0.0);
    }
  }
}

TEST(SyntheticClassification, HighTemperatureGivesLogK) {
  const auto s = candidate_scores_from_logits(std::vector<double>{3, -1, 0.5, 2}, 1e9);
  for (double v : s.values()) EXPECT_NEAR(v, std::log(4.0), 1e-8);
}

TEST(SyntheticClassification, ConfidentMarginGivesZeroScore) {
  const auto s = candidate_scores_from_logits(std::vector<double>{1000, 0}, 1.0);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[1], 1000.0, 1e-9);
}

TEST(SyntheticClassification, DeterministicAndValid) {
  SyntheticClassificationSpec spec;
  spec.seed = 9;
  const auto a = gen_synthetic_classification(spec);
  const auto b = gen_synthetic_classification(spec);
  EXPECT_EQ(a.calib, b.calib);
  EXPECT_EQ(a.test, b.test);
  for (const auto& row : a.calib) {
    ASSERT_EQ(row.scores.size(), spec.n_classes);
    ASSERT_GE(row.label, 0);
    ASSERT_LT(row.label, static_cast<int>(spec.n_classes));
    double mass = 0.0;
    for (double v : row.scores.values()) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      mass += std::exp(-v);
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
  }
}

TEST(SyntheticClassification, LabelsFollowModelProbabilities) {
  // Labels come from the same softmax as the scores.
  SyntheticClassificationSpec spec;
  spec.n_calib = 5000;
  spec.n_test = 0;
  const auto d = gen_synthetic_classification(spec);
  double mean_p = 0.0;
  for (const auto& row : d.calib) {
    mean_p += std::exp(-row.scores[static_cast<std::size_t>(row.label)]);
  }
  mean_p /= static_cast<double>(d.calib.size());
  EXPECT_GT(mean_p, 1.5 / static_cast<double>(spec.n_classes));
}

}  // namespace
}  // namespace ecp
