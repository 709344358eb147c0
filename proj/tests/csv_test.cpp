#include <gtest/gtest.h>

#include <random>
#include <variant>

#include "ecp/scores_csv.hpp"
#include "test_util.hpp"

namespace ecp {
namespace {

using testing::expect_error;

TEST(RegressionCalibCsv, Row) {
  const auto f = parse_regression_calib_csv("id,score\n7,0.25\n8,1\n");
  EXPECT_EQ(f.ids, (std::vector<std::int64_t>{7, 8}));
  EXPECT_EQ(f.scores[0], 0.25);
  EXPECT_EQ(f.scores.sum(), 1.25);
}

TEST(RegressionCalibCsv, Errors) {
  expect_error(ErrorKind::parse_error, [] { parse_regression_calib_csv("id,score\n1,0.5\n2,abc\n"); }, 3);
  expect_error(ErrorKind::negative_score, [] { parse_regression_calib_csv("id,score\n1,0.5\n2,-1\n"); }, 3);
  expect_error(ErrorKind::schema_mismatch, [] { parse_regression_calib_csv("id,value\n1,0.5\n"); });
  expect_error(ErrorKind::schema_mismatch, [] { parse_regression_calib_csv("id,score\n1,0.5,3\n"); }, 2);
  expect_error(ErrorKind::too_few, [] { parse_regression_calib_csv("id,score\n1,0.5\n"); });
}

TEST(ClassificationCsv, Row) {
  const auto f = parse_classification_csv("id,label,s0,s1\n3,1,0.2,0.9\n4,-1,0.5,0.5\n");
  EXPECT_EQ(f.n_classes, 2u);
  EXPECT_EQ(f.ids[0], 3);
  EXPECT_EQ(f.rows[0].label, 1);
  EXPECT_EQ(f.rows[0].scores[0], 0.2);
  EXPECT_EQ(f.rows[0].scores[1], 0.9);
  EXPECT_EQ(f.rows[1].label, -1);
}

TEST(ClassificationCsv, ArityMismatch) {
  expect_error(ErrorKind::schema_mismatch,
               [] { parse_classification_csv("id,label,s0,s1\n3,1,0.2\n"); }, 2);
  expect_error(ErrorKind::schema_mismatch,
               [] { parse_classification_csv("id,label,s0,s1\n3,2,0.2,0.1\n"); }, 2);
  expect_error(ErrorKind::schema_mismatch, [] { parse_classification_csv("id,label,s0\n3,0,1\n"); });
}

TEST(RegressionTestCsv, OptionalLabel) {
  const auto a = parse_regression_test_csv("id,prediction\n0,1.5\n");
  EXPECT_FALSE(a.has_labels);
  EXPECT_FALSE(a.samples[0].label.has_value());
  const auto b = parse_regression_test_csv("id,prediction,label\n0,1.5,1\n");
  EXPECT_TRUE(b.has_labels);
  EXPECT_EQ(b.samples[0].score, 0.5);
}

TEST(CsvRoundTrip, RandomRegression) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1e3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> raw(50);
    for (double& x : raw) x = u(rng) * std::pow(10.0, rep - 10);
    const auto s = CalibScores::validate(raw);
    const auto ids = sequential_ids(raw.size());
    const auto back = parse_regression_calib_csv(format_regression_calib_csv(ids, s));
    EXPECT_EQ(back.scores, s);
    EXPECT_EQ(back.ids, ids);
  }
}

TEST(CsvRoundTrip, RandomClassification) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticClassificationSpec spec;
    spec.seed = seed;
    spec.temperature = 0.3 + seed;
    const auto data = gen_synthetic_classification(spec);
    const auto ids = sequential_ids(data.calib.size());
    const auto path = std::filesystem::temp_directory_path() / "ecp_csv_test" / "cls.csv";
    save_classification_csv(path, ids, data.calib);
    const auto loaded = load_scores_csv(path, Task::classification);
    const auto& back = std::get<ClassificationFile>(loaded);
    EXPECT_EQ(back.rows, data.calib);
  }
}

TEST(CsvRoundTrip, RegressionTestFile) {
  SyntheticRegressionSpec spec;
  const auto data = gen_synthetic_regression(spec);
  RegressionTestFile f{sequential_ids(data.test.size()), data.test, true};
  const auto back = parse_regression_test_csv(format_regression_test_csv(f));
  ASSERT_EQ(back.samples.size(), f.samples.size());
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].prediction, f.samples[i].prediction);
    EXPECT_EQ(back.samples[i].label, f.samples[i].label);
  }
}

TEST(Csv, BlankLinesAndCrlfTolerated) {
  const auto f = parse_regression_calib_csv("id,score\r\n\r\n1,0.5\r\n2,0.25\r\n\r\n");
  EXPECT_EQ(f.scores.count(), 2u);
}

}  // namespace
}  // namespace ecp
