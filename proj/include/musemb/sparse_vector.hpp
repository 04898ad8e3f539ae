#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "musemb/errors.hpp"
#include "musemb/opcount.hpp"

namespace musemb {

// Sparse real vector with strictly increasing indices and no stored zeros.
struct SparseVector {
  std::vector<std::int32_t> idx;
  std::vector<float> val;
  std::int32_t dim = 0;

  std::size_t nnz() const { return idx.size(); }

  // Builds from unordered (index, value) entries. Sorts, drops exact zeros,
  // rejects duplicates and out-of-range indices.
  static SparseVector from_entries(std::int32_t dim,
                                   std::vector<std::pair<std::int32_t, float>> entries) {
    if (dim <= 0) throw data_error("sparse vector dim must be positive");
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector v;
    v.dim = dim;
    v.idx.reserve(entries.size());
    v.val.reserve(entries.size());
    for (const auto& [i, x] : entries) {
      if (i < 0 || i >= dim)
        throw data_error("feature index " + std::to_string(i) + " out of range [0, " +
                         std::to_string(dim) + ")");
      if (!v.idx.empty() && v.idx.back() == i)
        throw data_error("duplicate feature index " + std::to_string(i));
      if (!std::isfinite(x)) throw data_error("non-finite feature value");
      if (x == 0.0f) continue;
      v.idx.push_back(i);
      v.val.push_back(x);
    }
    return v;
  }

  bool operator==(const SparseVector& o) const = default;
};

// Dot product of two sparse vectors over a sorted index merge.
inline double dot(const SparseVector& a, const SparseVector& b) {
  if (a.dim != b.dim)
    throw data_error("sparse dot: dimension mismatch (" + std::to_string(a.dim) + " vs " +
                     std::to_string(b.dim) + ")");
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.idx.size() && j < b.idx.size()) {
    if (a.idx[i] == b.idx[j]) {
      acc += static_cast<double>(a.val[i]) * static_cast<double>(b.val[j]);
      ++i;
      ++j;
    } else if (a.idx[i] < b.idx[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  opcount::add(std::min(a.nnz(), b.nnz()));
  return acc;
}

inline double squared_norm(const SparseVector& a) {
  double acc = 0.0;
  for (float x : a.val) acc += static_cast<double>(x) * static_cast<double>(x);
  opcount::add(a.nnz());
  return acc;
}

inline double norm(const SparseVector& a) { return std::sqrt(squared_norm(a)); }

// Concatenates two sparse vectors into one of dimension a.dim + b.dim,
// offsetting the second vector's indices by the first vector's dimension.
// Used to merge two independently quantized feature sets for one song.
inline SparseVector concat(const SparseVector& a, const SparseVector& b) {
  SparseVector out;
  out.dim = a.dim + b.dim;
  out.idx.reserve(a.nnz() + b.nnz());
  out.val.reserve(a.nnz() + b.nnz());
  out.idx = a.idx;
  out.val = a.val;
  for (std::size_t k = 0; k < b.idx.size(); ++k) {
    out.idx.push_back(b.idx[k] + a.dim);
    out.val.push_back(b.val[k]);
  }
  return out;
}

}  // namespace musemb
