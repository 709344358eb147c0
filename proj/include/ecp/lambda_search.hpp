#pragma once

// Choosing lambda for a target mean leave-one-out set size M.
//
// Expansion doubles lambda while the mean size is below M and halves it while
// above, until the sign of (size - M) flips. Bisection then halves the bracket
// [lambda_low, lambda_high], with size(lambda_low) < M <= size(lambda_high),
// until |size - M| <= tolerance.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ecp/error.hpp"
#include "ecp/parallel.hpp"
#include "ecp/scores.hpp"
#include "ecp/trainer.hpp"

namespace ecp {

struct LambdaSearchConfig {
  double target_size = 2.0;
  double tolerance = 0.1;
  double initial_lambda = 10.0;
  std::size_t max_expansions = 60;
  std::size_t max_bisections = 60;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (!(target_size > 0.0)) throw Error(ErrorKind::invalid_argument, "target size must be > 0");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be > 0");
    if (!(initial_lambda > 0.0) || !std::isfinite(initial_lambda)) {
      throw Error(ErrorKind::invalid_argument, "initial lambda must be finite and > 0");
    }
  }
};

enum class SearchPhase { expand, bisect };

constexpr std::string_view to_string(SearchPhase p) noexcept {
  return p == SearchPhase::expand ? "expand" : "bisect";
}

struct SearchStep {
  std::size_t iteration = 0;
  SearchPhase phase = SearchPhase::expand;
  double lambda = 0.0;
  double mean_size = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SearchStep&, const SearchStep&) = default;
};

struct SearchTrace {
  std::vector<SearchStep> steps;
  double lambda_m = 0.0;
  bool converged = false;

  friend bool operator==(const SearchTrace&, const SearchTrace&) = default;
};

namespace search_detail {

template <class Evaluator>
double call(Evaluator& evaluate, double lambda, std::uint64_t seed) {
  if constexpr (std::is_invocable_r_v<double, Evaluator&, double, std::uint64_t>) {
    return evaluate(lambda, seed);
  } else {
    static_assert(std::is_invocable_r_v<double, Evaluator&, double>,
                  "evaluator must be callable as f(lambda) or f(lambda, seed)");
    return evaluate(lambda);
  }
}

struct Point {
  double lambda;
  double size;
};

}  // namespace search_detail

/// `evaluate` maps lambda (and a derived seed) to a mean leave-one-out size.
/// Throws NoBracket when expansion runs out; returns converged = false with
/// the closest lambda seen when bisection runs out.
template <class Evaluator>
SearchTrace select_lambda(Evaluator&& evaluate, const LambdaSearchConfig& cfg) {
  using search_detail::Point;
  cfg.validate();
  const double target = cfg.target_size;
  SearchTrace trace;

  auto measure = [&](double lambda, SearchPhase phase) {
    const std::size_t iteration = trace.steps.size();
    const std::uint64_t seed = mix_seed(cfg.master_seed, iteration);
    const double size = search_detail::call(evaluate, lambda, seed);
    if (!std::isfinite(size)) {
      throw Error(ErrorKind::non_finite, "mean size at lambda " + std::to_string(lambda) +
                                             " is not finite");
    }
    trace.steps.push_back({iteration, phase, lambda, size, seed});
    return Point{lambda, size};
  };
  auto finish = [&](double lambda, bool converged) {
    trace.lambda_m = lambda;
    trace.converged = converged;
    return trace;
  };

  Point prev = measure(cfg.initial_lambda, SearchPhase::expand);
  if (std::abs(prev.size - target) <= cfg.tolerance) return finish(prev.lambda, true);

  const bool upward = prev.size < target;
  Point low{};
  Point high{};
  for (std::size_t expansions = 0;; ++expansions) {
    if (expansions == cfg.max_expansions) {
      throw Error(ErrorKind::no_bracket,
                  "no bracket for target " + std::to_string(target) + " after " +
                      std::to_string(expansions) + " expansions (last lambda " +
                      std::to_string(prev.lambda) + ", size " + std::to_string(prev.size) + ")");
    }
    const Point cur =
        measure(upward ? 2.0 * prev.lambda : 0.5 * prev.lambda, SearchPhase::expand);
    if (upward && cur.size >= target) {
      low = prev;
      high = cur;
      break;
    }
    if (!upward && cur.size <= target) {
      // An exact hit cannot serve as the strict lower end of a bracket.
      if (cur.size == target) return finish(cur.lambda, true);
      low = cur;
      high = prev;
      break;
    }
    prev = cur;
  }

  for (std::size_t b = 0; b < cfg.max_bisections; ++b) {
    const Point mid = measure(0.5 * (low.lambda + high.lambda), SearchPhase::bisect);
    if (std::abs(mid.size - target) <= cfg.tolerance) return finish(mid.lambda, true);
    if (mid.size < target) {
      low = mid;
    } else {
      high = mid;
    }
  }

  const SearchStep* best = &trace.steps.front();
  for (const auto& s : trace.steps) {
    if (std::abs(s.mean_size - target) < std::abs(best->mean_size - target)) best = &s;
  }
  return finish(best->lambda, false);
}

/// Production evaluator: trains a fresh policy for each lambda with the
/// supplied seed and reports its mean leave-one-out size. Every run is kept.
class TrainingEvaluator {
 public:
  TrainingEvaluator(const CalibrationSet& calib, TrainConfig base)
      : calib_(&calib), base_(std::move(base)) {}

  double operator()(double lambda, std::uint64_t seed) {
    TrainConfig cfg = base_;
    cfg.lambda = lambda;
    cfg.seed = seed;
    runs_.push_back(train_policy(*calib_, cfg));
    return runs_.back().report.loo_mean_size;
  }

  const std::vector<TrainResult>& runs() const noexcept { return runs_; }

  /// The run whose lambda and seed match a trace step.
  const TrainResult& run_for(const SearchStep& step) const {
    for (const auto& r : runs_) {
      if (r.report.config.lambda == step.lambda && r.report.config.seed == step.seed) return r;
    }
    throw Error(ErrorKind::invalid_argument, "no training run for that search step");
  }

 private:
  const CalibrationSet* calib_;
  TrainConfig base_;
  std::vector<TrainResult> runs_;
};

}  // namespace ecp
