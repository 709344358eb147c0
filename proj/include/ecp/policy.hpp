#pragma once

// Coverage policy: a one-hidden-layer ReLU network mapping
// (calibration score sum, test statistic) to a miscoverage level.
//
//   x     = standardize([sum / count] ++ candidate scores)
//   h     = relu(W1 x + b1)
//   alpha = alpha_lo + (alpha_hi - alpha_lo) * sigmoid(w2 . h + b2)
//
// The range map keeps alpha inside (alpha_lo, alpha_hi) for every input, so a
// regression policy can never produce an unbounded interval.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ecp/conformal.hpp"
#include "ecp/error.hpp"
#include "ecp/scores.hpp"

namespace ecp {

/// Which features the network sees. `loo_score` appends the held-out score of
/// a leave-one-out episode; that score does not exist for a real test point,
/// so such policies are usable for training diagnostics only.
enum class PolicyInputKind { definition2, loo_score };

constexpr std::string_view to_string(PolicyInputKind kind) noexcept {
  return kind == PolicyInputKind::definition2 ? "definition2" : "loo-score";
}

inline PolicyInputKind parse_policy_input(std::string_view text) {
  if (text == "definition2") return PolicyInputKind::definition2;
  if (text == "loo-score") return PolicyInputKind::loo_score;
  throw Error(ErrorKind::invalid_argument, "unknown policy input '" + std::string(text) + "'");
}

/// Per-feature standardization, frozen at training time.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Normalizer identity(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  /// Column mean and population sd over `rows`. Constant columns get sd = 1.
  static Normalizer fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw Error(ErrorKind::too_few, "cannot fit a normalizer on zero rows", 0);
    const std::size_t dim = rows.front().size();
    Normalizer out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
      if (r.size() != dim) throw Error(ErrorKind::dim_mismatch, "ragged feature rows");
      for (std::size_t j = 0; j < dim; ++j) out.mean[j] += r[j];
    }
    for (double& m : out.mean) m /= n;
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) out.sd[j] += (r[j] - out.mean[j]) * (r[j] - out.mean[j]);
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = std::sqrt(out.sd[j] / n);
      const double scale = std::max(1.0, std::abs(out.mean[j]));
      out.sd[j] = sd > 1e-12 * scale ? sd : 1.0;
    }
    return out;
  }

  std::size_t dim() const noexcept { return mean.size(); }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

/// Trainable weights. Flat index order is [W1 (row-major) | b1 | w2 | b2].
struct PolicyWeights {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> w1;  // hidden_dim x input_dim
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  static PolicyWeights zeros(std::size_t input_dim, std::size_t hidden_dim) {
    return {input_dim,
            hidden_dim,
            std::vector<double>(input_dim * hidden_dim, 0.0),
            std::vector<double>(hidden_dim, 0.0),
            std::vector<double>(hidden_dim, 0.0),
            0.0};
  }

  std::size_t size() const noexcept { return w1.size() + b1.size() + w2.size() + 1; }

  double& operator[](std::size_t i) {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    return b2;
  }
  double operator[](std::size_t i) const { return const_cast<PolicyWeights&>(*this)[i]; }

  bool same_shape(const PolicyWeights& other) const noexcept {
    return input_dim == other.input_dim && hidden_dim == other.hidden_dim &&
           w1.size() == other.w1.size() && b1.size() == other.b1.size() &&
           w2.size() == other.w2.size();
  }

  bool consistent() const noexcept {
    return w1.size() == input_dim * hidden_dim && b1.size() == hidden_dim &&
           w2.size() == hidden_dim;
  }

  /// FNV-1a over dimensions and raw parameter bits.
  std::uint64_t fingerprint() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
      const auto* p = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
      }
    };
    mix(&input_dim, sizeof input_dim);
    mix(&hidden_dim, sizeof hidden_dim);
    mix(w1.data(), w1.size() * sizeof(double));
    mix(b1.data(), b1.size() * sizeof(double));
    mix(w2.data(), w2.size() * sizeof(double));
    mix(&b2, sizeof b2);
    return h;
  }

  friend bool operator==(const PolicyWeights&, const PolicyWeights&) = default;
};

struct PolicyParams {
  Task task = Task::regression;
  PolicyInputKind input_kind = PolicyInputKind::definition2;
  std::size_t n_calib = 0;
  PolicyWeights weights;
  double alpha_lo = 0.0;
  double alpha_hi = 1.0;
  Normalizer normalizer;

  std::size_t input_dim() const noexcept { return weights.input_dim; }
  std::size_t hidden_dim() const noexcept { return weights.hidden_dim; }

  void validate() const {
    if (!(alpha_lo > 0.0 && alpha_lo < alpha_hi && alpha_hi <= 1.0)) {
      throw Error(ErrorKind::bad_dims, "alpha range must satisfy 0 < lo < hi <= 1");
    }
    if (weights.input_dim < 1 || weights.hidden_dim < 1 || !weights.consistent()) {
      throw Error(ErrorKind::bad_dims, "inconsistent weight dimensions");
    }
    if (normalizer.mean.size() != weights.input_dim || normalizer.sd.size() != weights.input_dim) {
      throw Error(ErrorKind::bad_dims, "normalizer dimension differs from input_dim");
    }
    for (double s : normalizer.sd) {
      if (!(s > 0.0)) throw Error(ErrorKind::bad_dims, "normalizer sd entries must be > 0");
    }
  }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

/// What the policy observes. `test_stat` is empty for regression.
struct PolicyInput {
  double calib_sum = 0.0;
  std::size_t calib_count = 0;
  std::span<const double> test_stat;
  std::optional<double> loo_score;
};

/// Unstandardized features. The sum enters as a mean so that training
/// episodes (n - 1 points) and test inputs (n points) share one scale.
inline std::vector<double> raw_features(const PolicyInput& in, PolicyInputKind kind) {
  if (in.calib_count == 0) throw Error(ErrorKind::dim_mismatch, "calibration count is zero");
  std::vector<double> x;
  x.reserve(2 + in.test_stat.size());
  x.push_back(in.calib_sum / static_cast<double>(in.calib_count));
  x.insert(x.end(), in.test_stat.begin(), in.test_stat.end());
  if (kind == PolicyInputKind::loo_score) {
    if (!in.loo_score) {
      throw Error(ErrorKind::invalid_argument,
                  "a loo-score policy needs the held-out score, which only exists inside "
                  "leave-one-out episodes");
    }
    x.push_back(*in.loo_score);
  }
  return x;
}

inline std::vector<double> featurize(const PolicyInput& in, const Normalizer& norm,
                                     PolicyInputKind kind = PolicyInputKind::definition2) {
  std::vector<double> x = raw_features(in, kind);
  if (x.size() != norm.dim()) {
    throw Error(ErrorKind::dim_mismatch, "feature vector has " + std::to_string(x.size()) +
                                             " entries, normalizer expects " +
                                             std::to_string(norm.dim()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - norm.mean[j]) / norm.sd[j];
  return x;
}

inline PolicyParams init_policy(Task task, std::size_t input_dim, std::size_t hidden_dim,
                                std::size_t n_calib, std::uint64_t seed,
                                bool init_output_near_one) {
  if (input_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorKind::bad_dims, "input_dim and hidden_dim must be >= 1");
  }
  if (task == Task::classification && input_dim < 3) {
    throw Error(ErrorKind::bad_dims, "classification input needs the mean score and >= 2 classes");
  }
  if (n_calib < 2) throw Error(ErrorKind::bad_dims, "n_calib must be >= 2");

  PolicyParams p;
  p.task = task;
  p.n_calib = n_calib;
  p.weights = PolicyWeights::zeros(input_dim, hidden_dim);
  // Above 1/n the n-1 point episode sets are bounded, and so are the n point
  // test sets.
  p.alpha_lo = task == Task::regression ? 1.0 / static_cast<double>(n_calib) + 1e-4 : 1e-4;
  p.alpha_hi = 1.0 - 1e-6;
  p.normalizer = Normalizer::identity(input_dim);

  std::mt19937_64 rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> u1(-r1, r1);
  std::uniform_real_distribution<double> u2(-r2, r2);
  for (double& w : p.weights.w1) w = u1(rng);
  for (double& b : p.weights.b1) b = u1(rng);
  for (double& w : p.weights.w2) w = u2(rng);
  p.weights.b2 = u2(rng);
  if (init_output_near_one) p.weights.b2 = std::log(0.995 / 0.005);
  p.validate();
  return p;
}

/// Intermediates saved by the forward pass.
struct ForwardCache {
  std::vector<double> x;
  std::vector<double> pre;
  std::vector<double> hidden;
  double out = 0.0;
  double sig = 0.0;
  double alpha = 0.0;
  std::uint64_t fingerprint = 0;
};

inline std::pair<Alpha, ForwardCache> policy_forward_features(const PolicyParams& p,
                                                              std::vector<double> x) {
  const auto& w = p.weights;
  if (x.size() != w.input_dim) {
    throw Error(ErrorKind::dim_mismatch, "input has " + std::to_string(x.size()) +
                                             " features, network expects " +
                                             std::to_string(w.input_dim));
  }
  ForwardCache c;
  c.pre.assign(w.hidden_dim, 0.0);
  c.hidden.assign(w.hidden_dim, 0.0);
  c.out = w.b2;
  for (std::size_t i = 0; i < w.hidden_dim; ++i) {
    double a = w.b1[i];
    for (std::size_t j = 0; j < w.input_dim; ++j) a += w.w1[i * w.input_dim + j] * x[j];
    c.pre[i] = a;
    c.hidden[i] = a > 0.0 ? a : 0.0;
    c.out += w.w2[i] * c.hidden[i];
  }
  c.sig = sigmoid(c.out);
  double alpha = p.alpha_lo + (p.alpha_hi - p.alpha_lo) * c.sig;
  // A saturated sigmoid rounds onto the range ends; keep alpha strictly inside.
  alpha = std::min(std::max(alpha, std::nextafter(p.alpha_lo, 1.0)),
                   std::nextafter(p.alpha_hi, 0.0));
  c.alpha = alpha;
  c.x = std::move(x);
  c.fingerprint = w.fingerprint();
  return {Alpha(alpha, p.alpha_lo, p.alpha_hi), std::move(c)};
}

inline std::pair<Alpha, ForwardCache> policy_forward(const PolicyParams& p, const PolicyInput& in) {
  return policy_forward_features(p, featurize(in, p.normalizer, p.input_kind));
}

/// d loss / d weights given d loss / d alpha. The normalizer and alpha range
/// are constants.
inline PolicyWeights policy_backward(const PolicyParams& p, const ForwardCache& c,
                                     double dloss_dalpha) {
  const auto& w = p.weights;
  if (c.fingerprint != w.fingerprint() || c.x.size() != w.input_dim ||
      c.pre.size() != w.hidden_dim) {
    throw Error(ErrorKind::stale_cache, "forward cache does not belong to these parameters");
  }
  PolicyWeights g = PolicyWeights::zeros(w.input_dim, w.hidden_dim);
  const double dout = dloss_dalpha * (p.alpha_hi - p.alpha_lo) * c.sig * (1.0 - c.sig);
  g.b2 = dout;
  for (std::size_t i = 0; i < w.hidden_dim; ++i) {
    g.w2[i] = dout * c.hidden[i];
    const double dpre = c.pre[i] > 0.0 ? dout * w.w2[i] : 0.0;
    g.b1[i] = dpre;
    for (std::size_t j = 0; j < w.input_dim; ++j) g.w1[i * w.input_dim + j] = dpre * c.x[j];
  }
  return g;
}

struct AdamState {
  PolicyWeights m;
  PolicyWeights v;
  std::uint64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const PolicyWeights& w, double lr = 1e-3) {
    AdamState s;
    s.m = PolicyWeights::zeros(w.input_dim, w.hidden_dim);
    s.v = s.m;
    s.lr = lr;
    return s;
  }
};

/// One bias-corrected Adam update, in place.
inline void adam_step(PolicyWeights& params, const PolicyWeights& grads, AdamState& s) {
  if (!params.same_shape(grads) || !params.same_shape(s.m) || !params.same_shape(s.v)) {
    throw Error(ErrorKind::shape_mismatch, "parameter, gradient and moment shapes differ");
  }
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = s.m[i];
    double& v = s.v[i];
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    params[i] -= s.lr * (m / c1) / (std::sqrt(v / c2) + s.eps);
  }
}

// --- policies as callables -------------------------------------------------

template <class P>
concept CoveragePolicy = requires(const P& policy, const PolicyInput& in) {
  { policy(in) } -> std::convertible_to<Alpha>;
};

/// alpha-tilde fixed in advance; alpha = 1 is allowed as the boundary case.
struct ConstantAlphaPolicy {
  double alpha;

  Alpha operator()(const PolicyInput&) const { return Alpha(alpha); }
};

class NetworkPolicy {
 public:
  explicit NetworkPolicy(PolicyParams params) : params_(std::move(params)) { params_.validate(); }

  Alpha operator()(const PolicyInput& in) const { return policy_forward(params_, in).first; }

  const PolicyParams& params() const noexcept { return params_; }

 private:
  PolicyParams params_;
};

}  // namespace ecp
