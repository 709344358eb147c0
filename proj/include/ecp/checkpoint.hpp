#pragma once

// Policy checkpoints as JSON. Doubles are written in shortest round-trip form,
// so save -> load reproduces every parameter bit for bit.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ecp/error.hpp"
#include "ecp/file_io.hpp"
#include "ecp/policy.hpp"

namespace ecp {

inline constexpr int kSchemaVersion = 1;

struct CheckpointMeta {
  double k = 100.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
};

/// Pretty-printed with a trailing newline; the canonical on-disk form of
/// every JSON artifact.
inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json checkpoint_to_json(const PolicyParams& p, const CheckpointMeta& meta) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["task"] = std::string(to_string(p.task));
  j["policy_input"] = std::string(to_string(p.input_kind));
  j["n_calib"] = p.n_calib;
  j["input_dim"] = p.input_dim();
  j["hidden_dim"] = p.hidden_dim();
  j["alpha_lo"] = p.alpha_lo;
  j["alpha_hi"] = p.alpha_hi;
  j["k"] = meta.k;
  j["lambda"] = meta.lambda;
  j["seed"] = meta.seed;
  j["normalizer"] = {{"mean", p.normalizer.mean}, {"sd", p.normalizer.sd}};
  j["W1"] = p.weights.w1;
  j["b1"] = p.weights.b1;
  j["w2"] = p.weights.w2;
  j["b2"] = p.weights.b2;
  j["config"] = meta.config;
  return j;
}

inline std::pair<PolicyParams, CheckpointMeta> checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::corrupt_file, "checkpoint is not a JSON object");
  if (!j.contains("schema_version")) {
    throw Error(ErrorKind::corrupt_file, "checkpoint is missing 'schema_version'");
  }
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion) {
    throw Error(ErrorKind::schema_version_mismatch,
                "checkpoint schema_version " + j["schema_version"].dump() + ", expected " +
                    std::to_string(kSchemaVersion));
  }
  try {
    for (const char* key : {"task", "n_calib", "input_dim", "hidden_dim", "alpha_lo", "alpha_hi",
                            "k", "lambda", "seed", "normalizer", "W1", "b1", "w2", "b2"}) {
      if (!j.contains(key)) {
        throw Error(ErrorKind::corrupt_file, std::string("checkpoint is missing '") + key + "'");
      }
    }
    PolicyParams p;
    p.task = parse_task(j.at("task").get<std::string>());
    p.input_kind = j.contains("policy_input")
                       ? parse_policy_input(j.at("policy_input").get<std::string>())
                       : PolicyInputKind::definition2;
    p.n_calib = j.at("n_calib").get<std::size_t>();
    p.weights.input_dim = j.at("input_dim").get<std::size_t>();
    p.weights.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    p.weights.w1 = j.at("W1").get<std::vector<double>>();
    p.weights.b1 = j.at("b1").get<std::vector<double>>();
    p.weights.w2 = j.at("w2").get<std::vector<double>>();
    p.weights.b2 = j.at("b2").get<double>();
    p.alpha_lo = j.at("alpha_lo").get<double>();
    p.alpha_hi = j.at("alpha_hi").get<double>();
    p.normalizer.mean = j.at("normalizer").at("mean").get<std::vector<double>>();
    p.normalizer.sd = j.at("normalizer").at("sd").get<std::vector<double>>();
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::corrupt_file, e.what());
    }
    CheckpointMeta meta;
    meta.k = j.at("k").get<double>();
    meta.lambda = j.at("lambda").get<double>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("config")) meta.config = j.at("config");
    return {std::move(p), std::move(meta)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_file, e.what());
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const PolicyParams& p,
                            const CheckpointMeta& meta) {
  write_text_file(path, dump_json(checkpoint_to_json(p, meta)));
}

inline std::pair<PolicyParams, CheckpointMeta> load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_file, "'" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace ecp
