// Trains a regression coverage policy and compares its intervals with the
// fixed-alpha e-value and split-conformal intervals.

#include <cstdio>
#include <vector>

#include "ecp/ecp.hpp"

int main() {
  ecp::SyntheticRegressionSpec spec;
  spec.seed = 1;
  spec.n_test = 1000;
  const auto data = ecp::gen_synthetic_regression(spec);
  const auto calib = ecp::CalibrationSet::regression(data.calib_scores());
  std::printf("fit: y = %.3f x + %.3f\n", data.fit.slope, data.fit.intercept);

  ecp::TrainConfig cfg = ecp::TrainConfig::defaults_for(ecp::Task::regression);
  cfg.lambda = 50.0;
  const auto trained = ecp::train_policy(calib, cfg);
  std::printf("trained %zu epochs, leave-one-out mean size %.3f\n", cfg.epochs,
              trained.report.loo_mean_size);

  std::vector<double> centers;
  for (const auto& t : data.test) centers.push_back(t.prediction);
  const ecp::NetworkPolicy policy(trained.params);
  const auto adaptive = ecp::e_adaptive(policy, calib.scores, centers);
  const auto e_fixed = ecp::baseline_e_fixed(calib.scores, centers, adaptive.mean_alpha);
  const auto p_fixed = ecp::baseline_p_fixed(calib.scores, centers, adaptive.mean_alpha);

  auto coverage = [&](const ecp::IntervalsResult& r) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) hit += r.intervals[i].contains(*data.test[i].label);
    return static_cast<double>(hit) / static_cast<double>(centers.size());
  };
  std::printf("%-10s %8s %8s %9s\n", "method", "alpha", "size", "coverage");
  std::printf("%-10s %8.4f %8.3f %9.3f\n", "e-adaptive", adaptive.mean_alpha, adaptive.mean_size,
              coverage(adaptive));
  std::printf("%-10s %8.4f %8.3f %9.3f\n", "e-fixed", adaptive.mean_alpha, e_fixed.mean_size,
              coverage(e_fixed));
  std::printf("%-10s %8.4f %8.3f %9.3f\n", "p-fixed", adaptive.mean_alpha, p_fixed.mean_size,
              coverage(p_fixed));
}
