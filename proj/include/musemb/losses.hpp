#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musemb/errors.hpp"
#include "musemb/rng.hpp"

namespace musemb {

// Weight sequence alpha_1 >= alpha_2 >= ... >= 0 whose prefix sums L(r)
// convert a positive label's rank into a loss weight. Uniform recovers the
// pairwise AUC objective; precision_at_k puts all weight on the top k;
// harmonic (alpha_i = 1/i) favors the top of the list smoothly.
struct AlphaScheme {
  enum class Kind { uniform, precision_at_k, harmonic };
  Kind kind = Kind::harmonic;
  std::int64_t k = 1;  // only for precision_at_k

  static AlphaScheme uniform() { return {Kind::uniform, 1}; }
  static AlphaScheme precision_at_k(std::int64_t k) { return {Kind::precision_at_k, k}; }
  static AlphaScheme harmonic() { return {Kind::harmonic, 1}; }

  double alpha(std::int64_t i) const {  // 1-based
    switch (kind) {
      case Kind::uniform: return 1.0;
      case Kind::precision_at_k: return i <= k ? 1.0 : 0.0;
      case Kind::harmonic: return 1.0 / static_cast<double>(i);
    }
    return 0.0;
  }
};

// max(0, 1 + f_k - f_j): pairwise margin violation of negative k against
// positive j.
inline double hinge(double f_j, double f_k) { return std::max(0.0, 1.0 + f_k - f_j); }

// Margin-based rank of positive j: number of negatives scoring within the
// unit margin of (or above) it.
inline std::int64_t margin_rank(std::span<const double> scores,
                                std::int32_t j,
                                std::span<const std::int32_t> positives) {
  if (!std::binary_search(positives.begin(), positives.end(), j))
    throw data_error("margin_rank: label " + std::to_string(j) + " is not positive");
  double f_j = scores[j];
  std::int64_t r = 0;
  for (std::int32_t k = 0; k < static_cast<std::int32_t>(scores.size()); ++k) {
    if (std::binary_search(positives.begin(), positives.end(), k)) continue;
    if (1.0 + scores[k] >= f_j) ++r;
  }
  return r;
}

// Full pairwise margin ranking loss: sum of hinges over every
// (positive, negative) pair. Sort-based, O(n log n); the tests compare it
// against the quadratic double loop.
inline double auc_loss_full(std::span<const double> scores,
                            std::span<const std::int32_t> positives) {
  if (positives.empty()) throw data_error("auc_loss_full: empty positive set");
  std::vector<double> neg;
  neg.reserve(scores.size());
  for (std::int32_t k = 0; k < static_cast<std::int32_t>(scores.size()); ++k)
    if (!std::binary_search(positives.begin(), positives.end(), k)) neg.push_back(scores[k]);
  std::sort(neg.begin(), neg.end());
  std::vector<double> suffix(neg.size() + 1, 0.0);
  for (std::size_t i = neg.size(); i > 0; --i) suffix[i - 1] = suffix[i] + neg[i - 1];

  double total = 0.0;
  for (std::int32_t j : positives) {
    // negatives with f_k > f_j - 1 contribute (1 + f_k - f_j) each
    double f_j = scores[j];
    auto it = std::upper_bound(neg.begin(), neg.end(), f_j - 1.0);
    std::size_t first = static_cast<std::size_t>(it - neg.begin());
    std::size_t cnt = neg.size() - first;
    total += static_cast<double>(cnt) * (1.0 - f_j) + suffix[first];
  }
  return total;
}

// L(r): prefix sum of the alpha sequence; L(0) = 0.
inline double big_L(std::int64_t r, const AlphaScheme& scheme) {
  if (r < 0) throw data_error("big_L: rank must be >= 0");
  switch (scheme.kind) {
    case AlphaScheme::Kind::uniform: return static_cast<double>(r);
    case AlphaScheme::Kind::precision_at_k: return static_cast<double>(std::min(r, scheme.k));
    case AlphaScheme::Kind::harmonic: {
      double acc = 0.0;
      for (std::int64_t i = 1; i <= r; ++i) acc += 1.0 / static_cast<double>(i);
      return acc;
    }
  }
  return 0.0;
}

// Sampled-rank approximation floor((Y-1)/N): N trials to find a violating
// negative out of Y labels means roughly (Y-1)/N negatives rank above.
inline std::int64_t estimate_rank(std::int64_t Y, std::int64_t N) {
  if (N < 1) throw data_error("estimate_rank: N must be >= 1");
  if (N > Y - 1) throw data_error("estimate_rank: N must be <= Y-1");
  return (Y - 1) / N;
}

// One sampled margin violation: positive j vs the negative k found after N
// uniform draws over the Y-label universe.
struct ViolationSample {
  std::int32_t positive = -1;
  std::int32_t negative = -1;
  double f_positive = 0.0;
  double f_negative = 0.0;
  std::int64_t trials = 0;
  std::int64_t universe = 0;

  std::int64_t rank_estimate() const { return estimate_rank(universe, trials); }
};

// Draws uniform negatives with replacement until one violates the margin
// (f_k > f_j - 1) or the trial budget Y-1 is spent. `excluded` (sorted) is
// never drawn: the positive labels, plus the query itself for the similar
// tasks.
inline std::optional<ViolationSample> sample_violator(
    const std::function<double(std::int32_t)>& score_fn,
    std::span<const std::int32_t> excluded, std::int32_t j, std::int64_t Y, Rng& rng) {
  std::int64_t n_negatives = Y - static_cast<std::int64_t>(excluded.size());
  if (n_negatives < 1) throw data_error("sample_violator: no negative labels exist");

  double f_j = score_fn(j);
  std::int64_t N = 0;
  while (N < Y - 1) {
    std::int32_t k;
    do {
      k = static_cast<std::int32_t>(rng.bounded(Y));
    } while (std::binary_search(excluded.begin(), excluded.end(), k));
    double f_k = score_fn(k);
    ++N;
    if (f_k > f_j - 1.0)
      return ViolationSample{j, k, f_j, f_k, N, Y};
  }
  return std::nullopt;
}

// Exact E[floor((Y-1)/N) | violator found] for a sampling process whose
// per-trial violation probability is q, capped at Y-1 trials. Companion
// oracle for the sampled estimator above.
inline double expected_rank_estimate(std::int64_t Y, double q) {
  if (q <= 0.0) throw data_error("expected_rank_estimate: q must be > 0");
  double p_prefix = 1.0;  // (1-q)^(n-1)
  double num = 0.0, den = 0.0;
  for (std::int64_t n = 1; n <= Y - 1; ++n) {
    double p = p_prefix * q;
    num += p * static_cast<double>((Y - 1) / n);
    den += p;
    p_prefix *= (1.0 - q);
  }
  return num / den;
}

// Exact E[L(floor((Y-1)/N)) | violator found]; used to measure the bias of
// the sampled weighting against L(true rank).
inline double expected_rank_weight(std::int64_t Y, double q, const AlphaScheme& scheme) {
  if (q <= 0.0) throw data_error("expected_rank_weight: q must be > 0");
  double p_prefix = 1.0;
  double num = 0.0, den = 0.0;
  for (std::int64_t n = 1; n <= Y - 1; ++n) {
    double p = p_prefix * q;
    num += p * big_L((Y - 1) / n, scheme);
    den += p;
    p_prefix *= (1.0 - q);
  }
  return num / den;
}

}  // namespace musemb
