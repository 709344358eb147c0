#pragma once

// Monte Carlo checks of the coverage and size guarantees, the constant-alpha
// oracle, and the fixed-alpha baselines.
//
// Trials are seeded as mix_seed(master, trial) and reduced in trial order, so
// results do not depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecp/conformal.hpp"
#include "ecp/error.hpp"
#include "ecp/parallel.hpp"
#include "ecp/policy.hpp"
#include "ecp/scores.hpp"
#include "ecp/trainer.hpp"

namespace ecp {

// --- data sources ----------------------------------------------------------

/// One test point: its true-label score, plus the candidate vector
/// (classification) or the point prediction (regression).
struct TestCase {
  double true_score = 0.0;
  double prediction = 0.0;
  std::optional<CandidateScores> candidates;
  int label = -1;
};

struct TrialData {
  CalibrationSet calib;
  TestCase test;
};

template <class G>
concept TrialGenerator = requires(const G& g, std::uint64_t seed, std::size_t n) {
  { g.task() } -> std::same_as<Task>;
  { g.default_n() } -> std::convertible_to<std::size_t>;
  { g.calibration(seed, n) } -> std::same_as<CalibrationSet>;
  { g.test_case(seed) } -> std::same_as<TestCase>;
};

template <TrialGenerator G>
TrialData draw_trial(const G& gen, std::uint64_t seed, std::size_t n) {
  return {gen.calibration(mix_seed(seed, 0), n), gen.test_case(mix_seed(seed, 1))};
}

/// Synthetic regression with a predictor fitted once on the spec's training
/// split and then held fixed; calibration and test points are fresh draws.
class RegressionTrialGenerator {
 public:
  explicit RegressionTrialGenerator(SyntheticRegressionSpec spec) : spec_(spec) {
    spec_.validate();
    std::mt19937_64 rng(spec_.seed);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < spec_.n_train; ++i) {
      auto [x, y] = draw_regression_point(spec_, rng);
      xs.push_back(x);
      ys.push_back(y);
    }
    fit_ = fit_ols_1d(xs, ys);
  }

  Task task() const noexcept { return Task::regression; }
  std::size_t default_n() const noexcept { return spec_.n_calib; }
  const LinearFit& fit() const noexcept { return fit_; }

  CalibrationSet calibration(std::uint64_t seed, std::size_t n) const {
    std::mt19937_64 rng(seed);
    std::vector<double> scores(n);
    for (double& s : scores) {
      auto [x, y] = draw_regression_point(spec_, rng);
      s = std::abs(fit_(x) - y);
    }
    return CalibrationSet::regression(CalibScores::validate(scores));
  }

  TestCase test_case(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    auto [x, y] = draw_regression_point(spec_, rng);
    TestCase t;
    t.prediction = fit_(x);
    t.true_score = std::abs(t.prediction - y);
    return t;
  }

 private:
  SyntheticRegressionSpec spec_;
  LinearFit fit_;
};

class ClassificationTrialGenerator {
 public:
  explicit ClassificationTrialGenerator(SyntheticClassificationSpec spec)
      : spec_(spec), model_(spec) {}

  Task task() const noexcept { return Task::classification; }
  std::size_t default_n() const noexcept { return spec_.n_calib; }

  CalibrationSet calibration(std::uint64_t seed, std::size_t n) const {
    std::mt19937_64 rng(seed);
    std::vector<LabeledCandidates> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(model_.sample(rng));
    return CalibrationSet::classification(rows);
  }

  TestCase test_case(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    LabeledCandidates row = model_.sample(rng);
    TestCase t;
    t.label = row.label;
    t.true_score = row.scores[static_cast<std::size_t>(row.label)];
    t.candidates = std::move(row.scores);
    return t;
  }

 private:
  SyntheticClassificationSpec spec_;
  SoftmaxLinearModel model_;
};

/// Every score equals `score`. n_classes == 0 means regression.
struct ConstantScoreGenerator {
  double score = 1.0;
  std::size_t n_classes = 0;
  std::size_t n = 100;

  Task task() const noexcept { return n_classes == 0 ? Task::regression : Task::classification; }
  std::size_t default_n() const noexcept { return n; }

  CalibrationSet calibration(std::uint64_t, std::size_t count) const {
    if (n_classes == 0) {
      return CalibrationSet::regression(CalibScores::validate(std::vector<double>(count, score)));
    }
    std::vector<LabeledCandidates> rows(
        count, {CandidateScores::validate(std::vector<double>(n_classes, score)), 0});
    return CalibrationSet::classification(rows);
  }

  TestCase test_case(std::uint64_t) const {
    TestCase t;
    t.true_score = score;
    if (n_classes != 0) {
      t.candidates = CandidateScores::validate(std::vector<double>(n_classes, score));
      t.label = 0;
    }
    return t;
  }
};

// --- one test evaluation ---------------------------------------------------

struct TrialOutcome {
  double alpha = 0.0;
  bool miss = false;
  double size = 0.0;  // exact; +inf for an unbounded interval
};

inline PolicyInput test_input(const CalibScores& calib, const TestCase& test) {
  PolicyInput in;
  in.calib_sum = calib.sum();
  in.calib_count = calib.count();
  if (test.candidates) in.test_stat = test.candidates->values();
  return in;
}

template <CoveragePolicy Policy>
TrialOutcome evaluate_test_case(const Policy& policy, const CalibScores& calib,
                                const TestCase& test) {
  const Alpha a = policy(test_input(calib, test));
  TrialOutcome out;
  out.alpha = a.value();
  if (test.candidates) {
    const LabelSet set = classification_set(calib, *test.candidates, a);
    out.miss = !set.contains(test.label);
    out.size = static_cast<double>(set.size());
  } else {
    const PredictionInterval iv = regression_interval(calib, test.prediction, a);
    out.miss = !(iv.radius.is_unbounded() || test.true_score < iv.radius.value());
    out.size = iv.size();
  }
  return out;
}

// --- coverage --------------------------------------------------------------

enum class CalibrationRegime { fresh, fixed };

constexpr std::string_view to_string(CalibrationRegime r) noexcept {
  return r == CalibrationRegime::fresh ? "fresh-calibration" : "fixed-calibration";
}

inline CalibrationRegime parse_regime(std::string_view text) {
  if (text == "fresh" || text == "fresh-calibration") return CalibrationRegime::fresh;
  if (text == "fixed" || text == "fixed-calibration") return CalibrationRegime::fixed;
  throw Error(ErrorKind::invalid_argument, "unknown calibration regime '" + std::string(text) + "'");
}

struct TrialRecord {
  std::size_t trial = 0;
  double alpha = 0.0;
  bool miss = false;
  double size = 0.0;
};

struct CoverageReport {
  std::size_t trials = 0;
  std::size_t n_calib = 0;
  CalibrationRegime regime = CalibrationRegime::fresh;
  double miss_rate = 0.0;
  double miss_rate_se = 0.0;  // binomial
  double mean_ratio = 0.0;    // mean of 1{miss} / alpha
  double ratio_se = 0.0;
  double mean_alpha = 0.0;
  double mean_size = 0.0;
  std::vector<TrialRecord> records;  // filled on request
};

struct MonteCarloOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_calib;  // generator default when empty
  CalibrationRegime regime = CalibrationRegime::fresh;
  bool keep_records = false;
  std::size_t threads = 0;  // 0: worker_count()
};

namespace eval_detail {

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::size_t threads_or_default(std::size_t t) { return t == 0 ? worker_count() : t; }

}  // namespace eval_detail

/// Post-hoc validity: estimates E[1{miss} / alpha-tilde], which must stay <= 1.
/// Fresh regime redraws calibration every trial; fixed regime draws one
/// calibration set and only redraws test points.
template <TrialGenerator G, CoveragePolicy Policy>
CoverageReport mc_posthoc_validity(const G& gen, const Policy& policy,
                                   const MonteCarloOptions& opt) {
  if (opt.trials == 0) throw Error(ErrorKind::invalid_argument, "trials must be > 0");
  const std::size_t n = opt.n_calib.value_or(gen.default_n());
  std::optional<CalibrationSet> shared;
  if (opt.regime == CalibrationRegime::fixed) {
    shared = gen.calibration(mix_seed(opt.seed, std::numeric_limits<std::uint64_t>::max()), n);
  }
  std::vector<TrialOutcome> outcomes(opt.trials);
  parallel_for(opt.trials, eval_detail::threads_or_default(opt.threads), [&](std::size_t i) {
    const std::uint64_t s = mix_seed(opt.seed, i);
    if (shared) {
      outcomes[i] = evaluate_test_case(policy, shared->scores, gen.test_case(mix_seed(s, 1)));
    } else {
      const TrialData t = draw_trial(gen, s, n);
      outcomes[i] = evaluate_test_case(policy, t.calib.scores, t.test);
    }
  });

  CoverageReport r;
  r.trials = opt.trials;
  r.n_calib = n;
  r.regime = opt.regime;
  std::vector<double> miss(opt.trials);
  std::vector<double> ratio(opt.trials);
  std::vector<double> alpha(opt.trials);
  std::vector<double> size(opt.trials);
  for (std::size_t i = 0; i < opt.trials; ++i) {
    miss[i] = outcomes[i].miss ? 1.0 : 0.0;
    ratio[i] = miss[i] / outcomes[i].alpha;
    alpha[i] = outcomes[i].alpha;
    size[i] = outcomes[i].size;
    if (opt.keep_records) {
      r.records.push_back({i, outcomes[i].alpha, outcomes[i].miss, outcomes[i].size});
    }
  }
  r.miss_rate = eval_detail::mean_of(miss);
  r.miss_rate_se =
      std::sqrt(r.miss_rate * (1.0 - r.miss_rate) / static_cast<double>(opt.trials));
  r.mean_ratio = eval_detail::mean_of(ratio);
  r.ratio_se = eval_detail::standard_error(ratio);
  r.mean_alpha = eval_detail::mean_of(alpha);
  r.mean_size = eval_detail::mean_of(size);
  return r;
}

/// Marginal miscoverage at a fixed alpha (Markov bound: <= alpha).
template <TrialGenerator G>
CoverageReport mc_fixed_alpha_coverage(const G& gen, double alpha, const MonteCarloOptions& opt) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::alpha_out_of_range, "alpha must lie in (0, 1)");
  }
  return mc_posthoc_validity(gen, ConstantAlphaPolicy{alpha}, opt);
}

// --- leave-one-out size consistency ----------------------------------------

struct SizeConsistencyReport {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t trials = 0;
  CalibrationRegime regime = CalibrationRegime::fresh;
  double loo_mean_size = 0.0;         // averaged over reps
  double mc_expected_test_size = 0.0;  // averaged over reps
  double abs_gap = 0.0;               // mean over reps
  double rel_gap = 0.0;               // mean over reps of abs gap / test size
  double median_abs_gap = 0.0;
  double empirical_mean_score = 0.0;
  std::vector<double> loo_sizes;
  std::vector<double> test_sizes;
  std::vector<double> gaps;
};

struct SizeConsistencyOptions {
  std::vector<std::size_t> ns{100};
  std::size_t reps = 20;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  CalibrationRegime regime = CalibrationRegime::fresh;
  std::size_t threads = 0;
};

/// Compares the leave-one-out mean size on one calibration draw with the
/// expected test-time size. Fresh regime: expectation over new calibration
/// sets and test points (shared by all reps of one n). Fixed regime:
/// expectation over test points for that rep's calibration set.
template <TrialGenerator G, CoveragePolicy Policy>
std::vector<SizeConsistencyReport> size_consistency_check(const G& gen, const Policy& policy,
                                                          const SizeConsistencyOptions& opt) {
  if (opt.reps == 0 || opt.trials == 0) {
    throw Error(ErrorKind::invalid_argument, "reps and trials must be > 0");
  }
  const std::size_t threads = eval_detail::threads_or_default(opt.threads);
  std::vector<SizeConsistencyReport> out;
  for (std::size_t a = 0; a < opt.ns.size(); ++a) {
    const std::size_t n = opt.ns[a];
    const std::uint64_t n_seed = mix_seed(opt.seed, a);
    SizeConsistencyReport r;
    r.n = n;
    r.reps = opt.reps;
    r.trials = opt.trials;
    r.regime = opt.regime;

    std::vector<double> sizes(opt.trials);
    auto test_mean = [&](const CalibrationSet* fixed, std::uint64_t s) {
      parallel_for(opt.trials, threads, [&](std::size_t t) {
        const std::uint64_t ts = mix_seed(s, t);
        if (fixed) {
          sizes[t] = evaluate_test_case(policy, fixed->scores, gen.test_case(ts)).size;
        } else {
          const TrialData d = draw_trial(gen, ts, n);
          sizes[t] = evaluate_test_case(policy, d.calib.scores, d.test).size;
        }
      });
      return eval_detail::mean_of(sizes);
    };

    double fresh_expectation = 0.0;
    if (opt.regime == CalibrationRegime::fresh) {
      fresh_expectation = test_mean(nullptr, mix_seed(n_seed, std::numeric_limits<std::uint64_t>::max()));
    }
    for (std::size_t rep = 0; rep < opt.reps; ++rep) {
      const std::uint64_t rs = mix_seed(n_seed, rep);
      const CalibrationSet calib = gen.calibration(mix_seed(rs, 0), n);
      const double loo = loo_mean_size(policy, calib);
      const double test = opt.regime == CalibrationRegime::fresh ? fresh_expectation
                                                                 : test_mean(&calib, mix_seed(rs, 1));
      r.loo_sizes.push_back(loo);
      r.test_sizes.push_back(test);
      r.gaps.push_back(std::abs(loo - test));
      r.rel_gap += std::abs(loo - test) / test;
      r.empirical_mean_score += calib.scores.mean();
    }
    const double reps = static_cast<double>(opt.reps);
    r.loo_mean_size = eval_detail::mean_of(r.loo_sizes);
    r.mc_expected_test_size = eval_detail::mean_of(r.test_sizes);
    r.abs_gap = eval_detail::mean_of(r.gaps);
    r.rel_gap /= reps;
    r.median_abs_gap = eval_detail::median_of(r.gaps);
    r.empirical_mean_score /= reps;
    out.push_back(std::move(r));
  }
  return out;
}

// --- constant-alpha oracle and lambda monotonicity -------------------------

struct OracleResult {
  double alpha = 0.0;
  double loo_size = 0.0;
  double objective = 0.0;
};

/// Grid minimizer of (mean LOO exact size at constant alpha) + lambda * alpha
/// over alpha = h, 2h, ... < 1 (regression: only alpha > 1/n). Ties go to the
/// smaller alpha.
inline OracleResult constant_alpha_oracle(const CalibrationSet& calib, double lambda,
                                          double resolution = 1e-4) {
  if (!(resolution > 0.0 && resolution < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "grid resolution must lie in (0, 1)");
  }
  const auto episodes = build_loo_episodes(calib);
  const double n = static_cast<double>(calib.size());
  std::optional<OracleResult> best;
  for (std::size_t i = 1;; ++i) {
    const double alpha = static_cast<double>(i) * resolution;
    if (!(alpha < 1.0)) break;
    if (calib.task == Task::regression && !(n * alpha - 1.0 > 0.0)) continue;
    const Alpha a(alpha);
    double size = 0.0;
    for (const auto& ep : episodes) size += episode_exact_size(ep, a);
    size /= n;
    const double objective = size + lambda * alpha;
    if (!best || objective < best->objective) best = OracleResult{alpha, size, objective};
  }
  if (!best) throw Error(ErrorKind::empty_grid, "no admissible alpha on the grid");
  return *best;
}

struct MonotonicityReport {
  std::vector<double> lambdas;
  std::vector<double> alphas;
  std::vector<double> sizes;
  bool is_monotone = true;
};

inline MonotonicityReport monotonicity_check(const CalibrationSet& calib,
                                             std::span<const double> lambdas,
                                             double resolution = 1e-4) {
  if (lambdas.empty()) throw Error(ErrorKind::empty_grid, "lambda grid is empty");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) {
      throw Error(ErrorKind::invalid_argument, "lambda grid must be strictly increasing");
    }
  }
  MonotonicityReport r;
  for (double lambda : lambdas) {
    const OracleResult o = constant_alpha_oracle(calib, lambda, resolution);
    if (!r.sizes.empty() && o.loo_size < r.sizes.back()) r.is_monotone = false;
    r.lambdas.push_back(lambda);
    r.alphas.push_back(o.alpha);
    r.sizes.push_back(o.loo_size);
  }
  return r;
}

// --- baselines and adaptive sets -------------------------------------------

struct SetsResult {
  std::vector<LabelSet> sets;
  std::vector<double> alphas;
  double mean_size = 0.0;
  double mean_alpha = 0.0;
};

struct IntervalsResult {
  std::vector<PredictionInterval> intervals;
  std::vector<double> alphas;
  double mean_size = 0.0;
  double mean_alpha = 0.0;
};

/// E-value sets at a data-dependent alpha from `policy`.
template <CoveragePolicy Policy>
SetsResult e_adaptive(const Policy& policy, const CalibScores& calib,
                      std::span<const CandidateScores> tests) {
  SetsResult r;
  for (const auto& c : tests) {
    PolicyInput in{calib.sum(), calib.count(), c.values(), std::nullopt};
    const Alpha a = policy(in);
    r.sets.push_back(classification_set(calib, c, a));
    r.alphas.push_back(a.value());
    r.mean_size += static_cast<double>(r.sets.back().size());
    r.mean_alpha += a.value();
  }
  if (!tests.empty()) {
    r.mean_size /= static_cast<double>(tests.size());
    r.mean_alpha /= static_cast<double>(tests.size());
  }
  return r;
}

template <CoveragePolicy Policy>
IntervalsResult e_adaptive(const Policy& policy, const CalibScores& calib,
                           std::span<const double> centers) {
  IntervalsResult r;
  for (double c : centers) {
    PolicyInput in{calib.sum(), calib.count(), {}, std::nullopt};
    const Alpha a = policy(in);
    r.intervals.push_back(regression_interval(calib, c, a));
    r.alphas.push_back(a.value());
    r.mean_size += r.intervals.back().size();
    r.mean_alpha += a.value();
  }
  if (!centers.empty()) {
    r.mean_size /= static_cast<double>(centers.size());
    r.mean_alpha /= static_cast<double>(centers.size());
  }
  return r;
}

/// E-value sets at one fixed alpha.
inline SetsResult baseline_e_fixed(const CalibScores& calib, std::span<const CandidateScores> tests,
                                   double alpha) {
  return e_adaptive(ConstantAlphaPolicy{alpha}, calib, tests);
}

inline IntervalsResult baseline_e_fixed(const CalibScores& calib, std::span<const double> centers,
                                        double alpha) {
  return e_adaptive(ConstantAlphaPolicy{alpha}, calib, centers);
}

/// Split-conformal quantile: the ceil((1 - alpha)(n + 1))-th smallest score,
/// unbounded when that rank exceeds n.
inline Bound split_conformal_quantile(const CalibScores& calib, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::alpha_out_of_range, "alpha must lie in (0, 1)");
  }
  const double n = static_cast<double>(calib.count());
  const double raw = (1.0 - alpha) * (n + 1.0);
  // Absorb representation error so that e.g. 0.6 * 5 ranks as 3, not 4.
  const auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  if (rank > calib.count()) return Bound::unbounded();
  if (rank == 0) return Bound::finite(0.0);
  std::vector<double> sorted(calib.values().begin(), calib.values().end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return Bound::finite(sorted[rank - 1]);
}

/// Standard split conformal with p-values: keeps y with S(x, y) <= q.
inline SetsResult baseline_p_fixed(const CalibScores& calib, std::span<const CandidateScores> tests,
                                   double alpha) {
  const Bound q = split_conformal_quantile(calib, alpha);
  SetsResult r;
  for (const auto& c : tests) {
    LabelSet set;
    for (std::size_t y = 0; y < c.size(); ++y) {
      if (q.is_unbounded() || c[y] <= q.value()) set.members.push_back(static_cast<int>(y));
    }
    r.mean_size += static_cast<double>(set.size());
    r.sets.push_back(std::move(set));
    r.alphas.push_back(alpha);
  }
  r.mean_alpha = alpha;
  if (!tests.empty()) r.mean_size /= static_cast<double>(tests.size());
  return r;
}

inline IntervalsResult baseline_p_fixed(const CalibScores& calib, std::span<const double> centers,
                                        double alpha) {
  const Bound q = split_conformal_quantile(calib, alpha);
  IntervalsResult r;
  for (double c : centers) {
    r.intervals.push_back({c, q});
    r.mean_size += r.intervals.back().size();
    r.alphas.push_back(alpha);
  }
  r.mean_alpha = alpha;
  if (!centers.empty()) r.mean_size /= static_cast<double>(centers.size());
  return r;
}

}  // namespace ecp
