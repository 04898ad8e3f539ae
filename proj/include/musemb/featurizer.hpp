#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "musemb/errors.hpp"
#include "musemb/io_util.hpp"
#include "musemb/rng.hpp"
#include "musemb/sparse_vector.hpp"

namespace musemb {

// Frame vectors of one song (or a training pool), row-major n x F.
struct FrameMatrix {
  std::int32_t n_frames = 0;
  std::int32_t dim = 0;
  std::vector<float> a;

  static FrameMatrix zeros(std::int32_t n, std::int32_t dim) {
    if (n < 0 || dim < 1) throw data_error("FrameMatrix: invalid dimensions");
    FrameMatrix f;
    f.n_frames = n;
    f.dim = dim;
    f.a.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim), 0.0f);
    return f;
  }

  const float* row(std::int32_t i) const {
    return a.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim);
  }
  float* row(std::int32_t i) {
    return a.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim);
  }

  void append(const FrameMatrix& other) {
    if (other.dim != dim) throw data_error("FrameMatrix: append dimension mismatch");
    a.insert(a.end(), other.a.begin(), other.a.end());
    n_frames += other.n_frames;
  }

  bool operator==(const FrameMatrix&) const = default;
};

// Codeword dictionary, row-major D x F.
struct Codebook {
  std::int32_t n_codes = 0;
  std::int32_t dim = 0;
  std::vector<float> centers;

  const float* row(std::int32_t i) const {
    return centers.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim);
  }
  float* row(std::int32_t i) {
    return centers.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim);
  }

  bool operator==(const Codebook&) const = default;
};

namespace detail {

inline double sq_dist(const float* a, const float* b, std::int32_t dim) {
  double acc = 0.0;
  for (std::int32_t i = 0; i < dim; ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

// Nearest center by Euclidean distance, ties to the lowest center index.
inline std::pair<std::int32_t, double> nearest_center(const Codebook& cb, const float* frame) {
  std::int32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::int32_t c = 0; c < cb.n_codes; ++c) {
    double d = sq_dist(cb.row(c), frame, cb.dim);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

}  // namespace detail

struct KmeansResult {
  Codebook codebook;
  std::vector<double> inertia;  // sum of squared distances, one entry per iteration
};

// Lloyd's algorithm with kmeans++ seeding. Empty clusters are re-seeded to
// the point farthest from its assigned center (ties to the lowest frame
// index). Deterministic for a fixed seed.
inline KmeansResult kmeans_fit(const FrameMatrix& frames, std::int32_t n_codes,
                               std::int32_t iters, std::uint64_t seed) {
  if (n_codes < 1) throw data_error("kmeans_fit: need at least one codeword");
  if (iters < 1) throw data_error("kmeans_fit: need at least one iteration");
  if (frames.n_frames < n_codes)
    throw data_error("kmeans_fit: fewer frames (" + std::to_string(frames.n_frames) +
                     ") than codewords (" + std::to_string(n_codes) + ")");
  for (float v : frames.a)
    if (!std::isfinite(v)) throw data_error("kmeans_fit: non-finite frame value");

  Rng rng(seed);
  std::int32_t n = frames.n_frames, dim = frames.dim;
  Codebook cb;
  cb.n_codes = n_codes;
  cb.dim = dim;
  cb.centers.assign(static_cast<std::size_t>(n_codes) * static_cast<std::size_t>(dim), 0.0f);

  // kmeans++: first center uniform, then proportional to squared distance
  // from the nearest chosen center.
  std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
  std::int32_t first = static_cast<std::int32_t>(rng.bounded(n));
  std::copy_n(frames.row(first), dim, cb.row(0));
  for (std::int32_t i = 0; i < n; ++i)
    d2[static_cast<std::size_t>(i)] = detail::sq_dist(frames.row(i), cb.row(0), dim);
  for (std::int32_t c = 1; c < n_codes; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::int32_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::int32_t>(rng.bounded(n));
    } else {
      double target = rng.uniform01() * total;
      double run = 0.0;
      pick = n - 1;
      for (std::int32_t i = 0; i < n; ++i) {
        run += d2[static_cast<std::size_t>(i)];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(frames.row(pick), dim, cb.row(c));
    for (std::int32_t i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] = std::min(
          d2[static_cast<std::size_t>(i)], detail::sq_dist(frames.row(i), cb.row(c), dim));
  }

  KmeansResult result;
  std::vector<std::int32_t> assign(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> prev_assign;
  std::vector<double> sums;
  std::vector<std::int64_t> counts;
  for (std::int32_t it = 0; it < iters; ++it) {
    double inertia = 0.0;
    for (std::int32_t i = 0; i < n; ++i) {
      auto [c, d] = detail::nearest_center(cb, frames.row(i));
      assign[static_cast<std::size_t>(i)] = c;
      d2[static_cast<std::size_t>(i)] = d;
      inertia += d;
    }
    result.inertia.push_back(inertia);
    if (assign == prev_assign) break;
    prev_assign = assign;

    sums.assign(cb.centers.size(), 0.0);
    counts.assign(static_cast<std::size_t>(n_codes), 0);
    for (std::int32_t i = 0; i < n; ++i) {
      std::int32_t c = assign[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(c)];
      const float* f = frames.row(i);
      double* s = sums.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim);
      for (std::int32_t k = 0; k < dim; ++k) s[k] += static_cast<double>(f[k]);
    }
    for (std::int32_t c = 0; c < n_codes; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      const double* s = sums.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim);
      float* ctr = cb.row(c);
      for (std::int32_t k = 0; k < dim; ++k) ctr[k] = static_cast<float>(s[k] * inv);
    }
    // re-seed empty clusters to the farthest point, in index order
    for (std::int32_t c = 0; c < n_codes; ++c) {
      if (counts[static_cast<std::size_t>(c)] != 0) continue;
      std::int32_t far = 0;
      double far_d = -1.0;
      for (std::int32_t i = 0; i < n; ++i)
        if (d2[static_cast<std::size_t>(i)] > far_d) {
          far_d = d2[static_cast<std::size_t>(i)];
          far = i;
        }
      std::copy_n(frames.row(far), dim, cb.row(c));
      d2[static_cast<std::size_t>(far)] = 0.0;  // claimed; next empty cluster takes another point
      prev_assign.clear();                      // force another pass
    }
  }
  result.codebook = std::move(cb);
  return result;
}

// Bag-of-codewords encoding: count, per codeword, the frames that quantize
// to it. The value sum always equals the frame count.
inline SparseVector encode_counts(const Codebook& cb, const FrameMatrix& frames) {
  if (frames.dim != cb.dim)
    throw data_error("encode_counts: frame dimension " + std::to_string(frames.dim) +
                     " does not match codebook dimension " + std::to_string(cb.dim));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(cb.n_codes), 0);
  for (std::int32_t i = 0; i < frames.n_frames; ++i)
    ++counts[static_cast<std::size_t>(detail::nearest_center(cb, frames.row(i)).first)];
  std::vector<std::pair<std::int32_t, float>> entries;
  for (std::int32_t c = 0; c < cb.n_codes; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0)
      entries.emplace_back(c, static_cast<float>(counts[static_cast<std::size_t>(c)]));
  return SparseVector::from_entries(cb.n_codes, entries);
}

inline constexpr char kFramesMagic[5] = "FRMS";
inline constexpr char kCodebookMagic[5] = "CBK1";

inline void write_frames(std::ostream& out, const FrameMatrix& f) {
  io::write_magic(out, kFramesMagic);
  io::write_u32(out, static_cast<std::uint32_t>(f.n_frames));
  io::write_u32(out, static_cast<std::uint32_t>(f.dim));
  for (float v : f.a) io::write_f32(out, v);
}

inline FrameMatrix read_frames(std::istream& in) {
  io::expect_magic(in, kFramesMagic, "frame file");
  std::uint32_t n = io::read_u32(in, "frame count");
  std::uint32_t dim = io::read_u32(in, "frame dim");
  if (dim < 1) throw data_error("frame file: invalid dimension");
  FrameMatrix f = FrameMatrix::zeros(static_cast<std::int32_t>(n), static_cast<std::int32_t>(dim));
  for (float& v : f.a) {
    v = io::read_f32(in, "frame data");
    if (!std::isfinite(v)) throw data_error("frame file: non-finite value");
  }
  return f;
}

inline void save_frames(const std::string& path, const FrameMatrix& f) {
  auto out = io::open_out(path);
  write_frames(out, f);
  if (!out) throw io_error("write failed: " + path);
}

inline FrameMatrix load_frames(const std::string& path) {
  auto in = io::open_in(path);
  return read_frames(in);
}

inline void write_codebook(std::ostream& out, const Codebook& cb) {
  io::write_magic(out, kCodebookMagic);
  io::write_u32(out, static_cast<std::uint32_t>(cb.n_codes));
  io::write_u32(out, static_cast<std::uint32_t>(cb.dim));
  for (float v : cb.centers) io::write_f32(out, v);
}

inline Codebook read_codebook(std::istream& in) {
  io::expect_magic(in, kCodebookMagic, "codebook");
  std::uint32_t d = io::read_u32(in, "codebook size");
  std::uint32_t dim = io::read_u32(in, "codebook dim");
  if (d < 1 || dim < 1) throw data_error("codebook: invalid dimensions");
  Codebook cb;
  cb.n_codes = static_cast<std::int32_t>(d);
  cb.dim = static_cast<std::int32_t>(dim);
  cb.centers.resize(static_cast<std::size_t>(d) * static_cast<std::size_t>(dim));
  for (float& v : cb.centers) {
    v = io::read_f32(in, "codebook centers");
    if (!std::isfinite(v)) throw data_error("codebook: non-finite center");
  }
  return cb;
}

inline void save_codebook(const std::string& path, const Codebook& cb) {
  auto out = io::open_out(path);
  write_codebook(out, cb);
  if (!out) throw io_error("write failed: " + path);
}

inline Codebook load_codebook(const std::string& path) {
  auto in = io::open_in(path);
  return read_codebook(in);
}

}  // namespace musemb
