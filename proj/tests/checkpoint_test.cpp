#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "ecp/checkpoint.hpp"
#include "test_util.hpp"

namespace ecp {
namespace {

using testing::expect_error;

PolicyParams sample_params() {
  PolicyParams p = init_policy(Task::classification, 4, 5, 120, 3, false);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] = g(rng) / 3.0;
  p.normalizer = Normalizer{{0.1, 0.2, 1.0 / 3.0, 5e-300}, {1.0, 2.0 / 7.0, 3.0, 1e300}};
  return p;
}

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / "ecp_checkpoint_test" / name;
}

TEST(Checkpoint, RoundTripIsExact) {
  const PolicyParams p = sample_params();
  CheckpointMeta meta;
  meta.k = 100;
  meta.lambda = 1.0 / 3.0;
  meta.seed = 0xFFFFFFFFFFFFFFFFULL;
  meta.config = {{"epochs", 7}};
  const auto path = temp_path("rt.json");
  save_checkpoint(path, p, meta);
  const auto [q, m] = load_checkpoint(path);
  EXPECT_EQ(q, p);
  EXPECT_EQ(m.lambda, meta.lambda);
  EXPECT_EQ(m.seed, meta.seed);
  EXPECT_EQ(m.config, meta.config);
}

TEST(Checkpoint, FieldNames) {
  const auto j = checkpoint_to_json(sample_params(), {});
  for (const char* key : {"schema_version", "task", "n_calib", "input_dim", "hidden_dim",
                          "alpha_lo", "alpha_hi", "k", "lambda", "seed", "normalizer", "W1",
                          "b1", "w2", "b2"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["task"], "classification");
  EXPECT_EQ(j["W1"].size(), 20u);
}

TEST(Checkpoint, MissingFieldIsCorrupt) {
  auto j = checkpoint_to_json(sample_params(), {});
  j.erase("b1");
  expect_error(ErrorKind::corrupt_file, [&] { checkpoint_from_json(j); });
  j = checkpoint_to_json(sample_params(), {});
  j["W1"].erase(0);
  expect_error(ErrorKind::corrupt_file, [&] { checkpoint_from_json(j); });
  j = checkpoint_to_json(sample_params(), {});
  j["alpha_lo"] = "low";
  expect_error(ErrorKind::corrupt_file, [&] { checkpoint_from_json(j); });
}

TEST(Checkpoint, VersionBump) {
  auto j = checkpoint_to_json(sample_params(), {});
  j["schema_version"] = kSchemaVersion + 1;
  expect_error(ErrorKind::schema_version_mismatch, [&] { checkpoint_from_json(j); });
}

TEST(Checkpoint, UnparsableFile) {
  const auto path = temp_path("garbage.json");
  write_text_file(path, "{ not json");
  expect_error(ErrorKind::corrupt_file, [&] { load_checkpoint(path); });
  expect_error(ErrorKind::io_error, [&] { load_checkpoint(temp_path("absent.json")); });
}

}  // namespace
}  // namespace ecp
