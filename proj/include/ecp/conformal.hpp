#pragma once

// E-value conformal sets and their sizes.
//
// With soft-rank e-values the membership test E_y < 1/alpha rearranges to
//   s_y * ((n + 1) * alpha - 1) < sum,
// so a set is fully described by one threshold on the candidate score. When
// (n + 1) * alpha <= 1 every candidate passes and the threshold is unbounded.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ecp/error.hpp"
#include "ecp/scores.hpp"

namespace ecp {

/// A miscoverage level inside (lo, hi). The single-argument form accepts the
/// closed upper end alpha = 1, the boundary policy whose guarantee is vacuous.
class Alpha {
 public:
  explicit Alpha(double value) : value_(value), lo_(0.0), hi_(1.0) {
    if (!(value > 0.0 && value <= 1.0)) {
      throw Error(ErrorKind::alpha_out_of_range,
                  "alpha must lie in (0, 1], got " + std::to_string(value));
    }
  }

  Alpha(double value, double lo, double hi) : value_(value), lo_(lo), hi_(hi) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < value && value < hi)) {
      throw Error(ErrorKind::alpha_out_of_range,
                  "alpha " + std::to_string(value) + " outside (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ")");
    }
  }

  double value() const noexcept { return value_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double value_;
  double lo_;
  double hi_;
};

/// A nonnegative threshold or radius that may be unbounded.
class Bound {
 public:
  static constexpr Bound finite(double v) noexcept { return Bound(v, false); }
  static constexpr Bound unbounded() noexcept { return Bound(0.0, true); }

  constexpr bool is_unbounded() const noexcept { return unbounded_; }
  /// +inf when unbounded.
  constexpr double value() const noexcept {
    return unbounded_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const Bound&, const Bound&) = default;

 private:
  constexpr Bound(double v, bool u) noexcept : value_(v), unbounded_(u) {}
  double value_;
  bool unbounded_;
};

struct LabelSet {
  std::vector<int> members;  // strictly increasing

  std::size_t size() const noexcept { return members.size(); }
  bool contains(int y) const noexcept {
    for (int m : members) {
      if (m == y) return true;
    }
    return false;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

struct PredictionInterval {
  double center = 0.0;
  Bound radius = Bound::unbounded();

  double lower() const noexcept { return center - radius.value(); }
  double upper() const noexcept { return center + radius.value(); }
  /// 2 * radius, or +inf.
  double size() const noexcept {
    return radius.is_unbounded() ? std::numeric_limits<double>::infinity() : 2.0 * radius.value();
  }
  /// Strict membership, matching the e-value test.
  bool contains(double y) const noexcept {
    return radius.is_unbounded() || std::abs(y - center) < radius.value();
  }
};

struct SmoothingConfig {
  double k = 100.0;

  void validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(ErrorKind::invalid_argument, "smoothing sharpness k must be finite and > 0");
    }
  }
};

/// Size together with its derivative in alpha.
struct SizeWithSlope {
  double size = 0.0;
  double dsize_dalpha = 0.0;
};

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// --- classification --------------------------------------------------------

inline Bound classification_threshold(ScoreSummary calib, const Alpha& alpha) {
  const double denom = static_cast<double>(calib.count + 1) * alpha.value() - 1.0;
  if (!(denom > 0.0)) return Bound::unbounded();
  return Bound::finite(calib.sum / denom);
}

inline Bound classification_threshold(const CalibScores& calib, const Alpha& alpha) {
  return classification_threshold(calib.summary(), alpha);
}

inline LabelSet classification_set(ScoreSummary calib, const CandidateScores& candidates,
                                   const Alpha& alpha) {
  const Bound t = classification_threshold(calib, alpha);
  LabelSet out;
  for (std::size_t y = 0; y < candidates.size(); ++y) {
    if (t.is_unbounded() || candidates[y] < t.value()) out.members.push_back(static_cast<int>(y));
  }
  return out;
}

inline LabelSet classification_set(const CalibScores& calib, const CandidateScores& candidates,
                                   const Alpha& alpha) {
  return classification_set(calib.summary(), candidates, alpha);
}

/// |classification_set| without materializing the members.
inline std::size_t classification_set_size(ScoreSummary calib, const CandidateScores& candidates,
                                           const Alpha& alpha) {
  const Bound t = classification_threshold(calib, alpha);
  if (t.is_unbounded()) return candidates.size();
  std::size_t count = 0;
  for (double s : candidates.values()) count += s < t.value() ? 1 : 0;
  return count;
}

/// Sigmoid-smoothed set size sum_y sigma(k (1/alpha - E_y)) and its alpha
/// derivative. Defined for every alpha in (0, 1]. A candidate with zero score
/// against an all-zero calibration sum has no e-value; it contributes nothing,
/// matching the strict exact test.
inline SizeWithSlope classification_size_smooth(ScoreSummary calib,
                                                const CandidateScores& candidates,
                                                const Alpha& alpha, const SmoothingConfig& cfg) {
  const double a = alpha.value();
  const double inv = 1.0 / a;
  const double np1 = static_cast<double>(calib.count + 1);
  SizeWithSlope out;
  for (double s : candidates.values()) {
    const double total = calib.sum + s;
    if (!(total > 0.0)) continue;
    const double e = np1 * s / total;
    const double sig = sigmoid(cfg.k * (inv - e));
    out.size += sig;
    out.dsize_dalpha += sig * (1.0 - sig) * cfg.k * (-inv * inv);
  }
  return out;
}

inline SizeWithSlope classification_size_smooth(const CalibScores& calib,
                                                const CandidateScores& candidates,
                                                const Alpha& alpha, const SmoothingConfig& cfg) {
  return classification_size_smooth(calib.summary(), candidates, alpha, cfg);
}

// --- regression (MAE score) ------------------------------------------------

inline PredictionInterval regression_interval(ScoreSummary calib, double center,
                                              const Alpha& alpha) {
  return {center, classification_threshold(calib, alpha)};
}

inline PredictionInterval regression_interval(const CalibScores& calib, double center,
                                              const Alpha& alpha) {
  return regression_interval(calib.summary(), center, alpha);
}

/// Interval length 2 sum / ((n + 1) alpha - 1) and its alpha derivative.
inline SizeWithSlope regression_size(ScoreSummary calib, const Alpha& alpha) {
  const double np1 = static_cast<double>(calib.count + 1);
  const double denom = np1 * alpha.value() - 1.0;
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::alpha_too_small,
                "alpha " + std::to_string(alpha.value()) + " must exceed 1/(n+1) = " +
                    std::to_string(1.0 / np1));
  }
  return {2.0 * calib.sum / denom, -2.0 * calib.sum * np1 / (denom * denom)};
}

inline SizeWithSlope regression_size(const CalibScores& calib, const Alpha& alpha) {
  return regression_size(calib.summary(), alpha);
}

}  // namespace ecp
