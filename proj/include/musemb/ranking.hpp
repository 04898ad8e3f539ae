#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace musemb {

struct ScoredLabel {
  std::int32_t id = 0;
  double score = 0.0;

  bool operator==(const ScoredLabel&) const = default;
};

// Labels ordered by descending score; equal scores break by ascending id.
struct RankedList {
  std::vector<ScoredLabel> items;
};

// Top-k selection over a dense score array. `exclude` removes one label id
// (self-match removal); k larger than the universe returns the full list.
inline RankedList top_k(std::span<const double> scores, std::size_t k,
                        std::int32_t exclude = -1) {
  std::vector<std::int32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  if (exclude >= 0 && static_cast<std::size_t>(exclude) < scores.size())
    order.erase(order.begin() + exclude);
  auto better = [&scores](std::int32_t a, std::int32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  RankedList out;
  out.items.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.items.push_back({order[i], scores[order[i]]});
  return out;
}

}  // namespace musemb
