#pragma once

#include <cmath>
#include <string>

#include "ecp/error.hpp"
#include "ecp/scores.hpp"

namespace ecp {

struct EValue {
  double value = 0.0;
};

/// Soft-rank e-value: the test score over the average of all n + 1 scores.
inline EValue soft_rank_evalue(ScoreSummary calib, double test_score) {
  if (!std::isfinite(test_score)) throw Error(ErrorKind::non_finite, "test score is not finite");
  if (test_score < 0.0) throw Error(ErrorKind::negative_score, "test score is negative");
  const double total = calib.sum + test_score;
  if (!(total > 0.0)) {
    throw Error(ErrorKind::all_zero_scores, "calibration and test scores are all zero");
  }
  return {test_score / (total / static_cast<double>(calib.count + 1))};
}

inline EValue soft_rank_evalue(const CalibScores& calib, double test_score) {
  return soft_rank_evalue(calib.summary(), test_score);
}

/// Markov thresholding: the label is kept iff e < 1/alpha.
inline bool markov_covered(EValue e, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::alpha_out_of_range, "alpha must lie in (0, 1)");
  }
  return e.value < 1.0 / alpha;
}

}  // namespace ecp
