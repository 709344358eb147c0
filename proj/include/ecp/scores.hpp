#pragma once

// Nonconformity scores: validated containers, the MAE score, 1-D least squares
// and the synthetic data generators used for desk-scale experiments.
//
// Scores are validated here, once, at ingestion. Everything downstream assumes
// finite nonnegative values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecp/error.hpp"

namespace ecp {

enum class Task { classification, regression };

constexpr std::string_view to_string(Task task) noexcept {
  return task == Task::classification ? "classification" : "regression";
}

inline Task parse_task(std::string_view text) {
  if (text == "classification") return Task::classification;
  if (text == "regression") return Task::regression;
  throw Error(ErrorKind::invalid_argument, "unknown task '" + std::string(text) + "'");
}

/// The two numbers every e-value formula needs from a calibration set.
struct ScoreSummary {
  double sum = 0.0;
  std::size_t count = 0;
};

namespace detail {

inline void check_score(double v, std::size_t index) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::non_finite, "score at index " + std::to_string(index) + " is not finite",
                index);
  }
  if (v < 0.0) {
    throw Error(ErrorKind::negative_score,
                "score at index " + std::to_string(index) + " is negative", index);
  }
}

}  // namespace detail

/// Calibration scores S(X_i, Y_i) with their cached sum.
class CalibScores {
 public:
  static CalibScores validate(std::span<const double> raw) {
    if (raw.size() < 2) {
      throw Error(ErrorKind::too_few,
                  "need at least 2 calibration scores, got " + std::to_string(raw.size()),
                  raw.size());
    }
    for (std::size_t i = 0; i < raw.size(); ++i) detail::check_score(raw[i], i);
    CalibScores out;
    out.values_.assign(raw.begin(), raw.end());
    out.sum_ = std::accumulate(out.values_.begin(), out.values_.end(), 0.0);
    return out;
  }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double sum() const noexcept { return sum_; }
  std::size_t count() const noexcept { return values_.size(); }
  double mean() const noexcept { return sum_ / static_cast<double>(values_.size()); }
  ScoreSummary summary() const noexcept { return {sum_, values_.size()}; }

  double min() const noexcept {
    double m = values_.front();
    for (double v : values_) m = v < m ? v : m;
    return m;
  }
  double max() const noexcept {
    double m = values_.front();
    for (double v : values_) m = v > m ? v : m;
    return m;
  }

  friend bool operator==(const CalibScores&, const CalibScores&) = default;

 private:
  CalibScores() = default;
  std::vector<double> values_;
  double sum_ = 0.0;
};

inline CalibScores validate_calib_scores(std::span<const double> raw) {
  return CalibScores::validate(raw);
}

/// Per-class scores (S(x, y))_{y=0..K-1} for one classification input.
class CandidateScores {
 public:
  static CandidateScores validate(std::span<const double> raw) {
    if (raw.size() < 2) {
      throw Error(ErrorKind::too_few, "need at least 2 classes, got " + std::to_string(raw.size()),
                  raw.size());
    }
    for (std::size_t i = 0; i < raw.size(); ++i) detail::check_score(raw[i], i);
    CandidateScores out;
    out.values_.assign(raw.begin(), raw.end());
    return out;
  }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t y) const { return values_[y]; }
  std::size_t size() const noexcept { return values_.size(); }

  friend bool operator==(const CandidateScores&, const CandidateScores&) = default;

 private:
  CandidateScores() = default;
  std::vector<double> values_;
};

/// A classification row. label == -1 marks an unlabeled test row.
struct LabeledCandidates {
  CandidateScores scores;
  int label = -1;

  friend bool operator==(const LabeledCandidates&, const LabeledCandidates&) = default;
};

/// Calibration data in the form the trainer and evaluators consume: the
/// true-label scores, plus the full candidate vectors for classification.
struct CalibrationSet {
  Task task = Task::regression;
  CalibScores scores;
  std::vector<CandidateScores> candidates;  // classification only, parallel to scores

  static CalibrationSet regression(CalibScores s) { return {Task::regression, std::move(s), {}}; }

  static CalibrationSet classification(std::span<const LabeledCandidates> rows) {
    if (rows.empty()) throw Error(ErrorKind::too_few, "empty classification calibration set", 0);
    const std::size_t k = rows.front().scores.size();
    std::vector<double> truth;
    std::vector<CandidateScores> cands;
    truth.reserve(rows.size());
    cands.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.scores.size() != k) {
        throw Error(ErrorKind::schema_mismatch,
                    "row " + std::to_string(i) + " has " + std::to_string(row.scores.size()) +
                        " classes, expected " + std::to_string(k),
                    i);
      }
      if (row.label < 0 || static_cast<std::size_t>(row.label) >= k) {
        throw Error(ErrorKind::schema_mismatch,
                    "calibration row " + std::to_string(i) + " needs a label in 0.." +
                        std::to_string(k - 1),
                    i);
      }
      truth.push_back(row.scores[static_cast<std::size_t>(row.label)]);
      cands.push_back(row.scores);
    }
    return {Task::classification, CalibScores::validate(truth), std::move(cands)};
  }

  std::size_t size() const noexcept { return scores.count(); }
  std::size_t n_classes() const noexcept { return candidates.empty() ? 0 : candidates.front().size(); }
};

inline double mae_score(double prediction, double label) {
  if (!std::isfinite(prediction) || !std::isfinite(label)) {
    throw Error(ErrorKind::non_finite, "prediction and label must be finite");
  }
  return std::abs(prediction - label);
}

struct RegressionSample {
  double prediction = 0.0;
  std::optional<double> label;
  std::optional<double> score;  // |prediction - label| when label is present

  static RegressionSample make(double prediction, std::optional<double> label = std::nullopt) {
    RegressionSample s{prediction, label, std::nullopt};
    if (label) s.score = mae_score(prediction, *label);
    return s;
  }

  friend bool operator==(const RegressionSample&, const RegressionSample&) = default;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const noexcept { return slope * x + intercept; }
};

inline LinearFit fit_ols_1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::invalid_argument, "xs and ys differ in length");
  }
  if (xs.size() < 2) throw Error(ErrorKind::too_few, "need at least 2 points", xs.size());
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::degenerate_x, "xs have zero variance");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// ---------------------------------------------------------------------------
// Synthetic regression: X ~ U[x_lo, x_hi], Y = slope * X + N(0, noise_sd^2),
// predictor = OLS fit on the training split, score = |f(X) - Y|.

struct SyntheticRegressionSpec {
  double slope = 2.0;
  double noise_sd = 1.0;
  double x_lo = -5.0;
  double x_hi = 5.0;
  std::size_t n_train = 100;
  std::size_t n_calib = 100;
  std::size_t n_test = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(x_lo < x_hi)) throw Error(ErrorKind::invalid_argument, "x_lo must be < x_hi");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
      throw Error(ErrorKind::invalid_argument, "noise_sd must be finite and >= 0");
    }
    if (n_train < 2) throw Error(ErrorKind::too_few, "n_train must be >= 2", n_train);
    if (n_calib < 2) throw Error(ErrorKind::too_few, "n_calib must be >= 2", n_calib);
  }
};

struct RegressionDataset {
  std::vector<double> train_x;
  std::vector<double> train_y;
  LinearFit fit;
  std::vector<RegressionSample> calib;
  std::vector<RegressionSample> test;

  CalibScores calib_scores() const {
    std::vector<double> s;
    s.reserve(calib.size());
    for (const auto& c : calib) s.push_back(*c.score);
    return CalibScores::validate(s);
  }
};

/// Draws one labeled point (x, y) from the synthetic regression distribution.
template <class Engine>
std::pair<double, double> draw_regression_point(const SyntheticRegressionSpec& spec, Engine& rng) {
  std::uniform_real_distribution<double> ux(spec.x_lo, spec.x_hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double x = ux(rng);
  const double y = spec.slope * x + spec.noise_sd * noise(rng);
  return {x, y};
}

inline RegressionDataset gen_synthetic_regression(const SyntheticRegressionSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  RegressionDataset data;
  data.train_x.reserve(spec.n_train);
  data.train_y.reserve(spec.n_train);
  for (std::size_t i = 0; i < spec.n_train; ++i) {
    auto [x, y] = draw_regression_point(spec, rng);
    data.train_x.push_back(x);
    data.train_y.push_back(y);
  }
  data.fit = fit_ols_1d(data.train_x, data.train_y);
  auto draw = [&](std::size_t n, std::vector<RegressionSample>& out) {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto [x, y] = draw_regression_point(spec, rng);
      out.push_back(RegressionSample::make(data.fit(x), y));
    }
  };
  draw(spec.n_calib, data.calib);
  draw(spec.n_test, data.test);
  return data;
}

// ---------------------------------------------------------------------------
// Synthetic classification: a fixed random softmax-linear model stands in for
// a trained black-box classifier. Scores are negative log-probabilities.

struct SyntheticClassificationSpec {
  std::size_t n_classes = 10;
  std::size_t feature_dim = 8;
  std::uint64_t logit_matrix_seed = 7;
  double temperature = 1.0;
  std::size_t n_calib = 100;
  std::size_t n_test = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_classes < 2) throw Error(ErrorKind::invalid_argument, "n_classes must be >= 2");
    if (feature_dim < 1) throw Error(ErrorKind::invalid_argument, "feature_dim must be >= 1");
    if (!(temperature > 0.0)) throw Error(ErrorKind::invalid_argument, "temperature must be > 0");
    if (n_calib < 2) throw Error(ErrorKind::too_few, "n_calib must be >= 2", n_calib);
  }
};

/// -log softmax(logits / temperature), computed with a max shift so every
/// entry is >= 0 exactly.
inline CandidateScores candidate_scores_from_logits(std::span<const double> logits,
                                                    double temperature) {
  double top = -std::numeric_limits<double>::infinity();
  for (double z : logits) top = std::max(top, z / temperature);
  double total = 0.0;
  for (double z : logits) total += std::exp(z / temperature - top);
  const double log_total = std::log(total);
  std::vector<double> scores;
  scores.reserve(logits.size());
  for (double z : logits) scores.push_back((top - z / temperature) + log_total);
  return CandidateScores::validate(scores);
}

class SoftmaxLinearModel {
 public:
  explicit SoftmaxLinearModel(const SyntheticClassificationSpec& spec)
      : k_(spec.n_classes), d_(spec.feature_dim), temperature_(spec.temperature) {
    spec.validate();
    std::mt19937_64 rng(spec.logit_matrix_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    weights_.resize(k_ * d_);
    for (double& w : weights_) w = normal(rng);
  }

  /// One (scores, label) draw: x ~ N(0, I), label ~ softmax(W x).
  template <class Engine>
  LabeledCandidates sample(Engine& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(d_);
    for (double& v : x) v = normal(rng);
    std::vector<double> logits(k_, 0.0);
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t j = 0; j < d_; ++j) logits[c] += weights_[c * d_ + j] * x[j];
    }
    const CandidateScores truth = candidate_scores_from_logits(logits, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    int label = static_cast<int>(k_) - 1;
    for (std::size_t c = 0; c < k_; ++c) {
      u -= std::exp(-truth[c]);
      if (u < 0.0) {
        label = static_cast<int>(c);
        break;
      }
    }
    return {candidate_scores_from_logits(logits, temperature_), label};
  }

  std::size_t n_classes() const noexcept { return k_; }

 private:
  std::size_t k_;
  std::size_t d_;
  double temperature_;
  std::vector<double> weights_;  // K x d, row-major
};

struct ClassificationDataset {
  std::vector<LabeledCandidates> calib;
  std::vector<LabeledCandidates> test;
};

inline ClassificationDataset gen_synthetic_classification(const SyntheticClassificationSpec& spec) {
  spec.validate();
  const SoftmaxLinearModel model(spec);
  std::mt19937_64 rng(spec.seed);
  ClassificationDataset data;
  data.calib.reserve(spec.n_calib);
  data.test.reserve(spec.n_test);
  for (std::size_t i = 0; i < spec.n_calib; ++i) data.calib.push_back(model.sample(rng));
  for (std::size_t i = 0; i < spec.n_test; ++i) data.test.push_back(model.sample(rng));
  return data;
}

}  // namespace ecp
