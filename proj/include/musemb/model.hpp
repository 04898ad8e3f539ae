#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/io_util.hpp"
#include "musemb/opcount.hpp"
#include "musemb/ranking.hpp"
#include "musemb/rng.hpp"
#include "musemb/sparse_vector.hpp"

namespace musemb {

// d x n matrix stored column-major: column i is entity i's embedding,
// contiguous in memory. Parameters are kept in single precision; score
// accumulation runs in double.
struct ColMat {
  std::int32_t d = 0;
  std::int32_t n = 0;
  std::vector<float> a;

  static ColMat zeros(std::int32_t d, std::int32_t n) {
    ColMat m;
    m.d = d;
    m.n = n;
    m.a.assign(static_cast<std::size_t>(d) * n, 0.0f);
    return m;
  }

  float* col(std::int32_t i) { return a.data() + static_cast<std::size_t>(i) * d; }
  const float* col(std::int32_t i) const { return a.data() + static_cast<std::size_t>(i) * d; }

  bool operator==(const ColMat&) const = default;
};

// The five retrieval tasks served by one shared embedding space.
enum class Task { artist_pred, song_pred, sim_artist, sim_song, tag_pred };

inline constexpr Task kAllTasks[] = {Task::artist_pred, Task::song_pred, Task::sim_artist,
                                     Task::sim_song, Task::tag_pred};

inline const char* task_name(Task t) {
  switch (t) {
    case Task::artist_pred: return "ap";
    case Task::song_pred: return "sp";
    case Task::sim_artist: return "sa";
    case Task::sim_song: return "ss";
    case Task::tag_pred: return "tp";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  for (Task t : kAllTasks)
    if (s == task_name(t)) return t;
  throw data_error("unknown task: " + s + " (ap|sp|sa|ss|tp)");
}

// true when the task's query is a song feature vector (otherwise an artist id)
inline bool task_query_is_song(Task t) {
  return t == Task::artist_pred || t == Task::sim_song || t == Task::tag_pred;
}

// true when the task ranks songs (otherwise artist or tag ids with stored columns)
inline bool task_ranks_songs(Task t) { return t == Task::song_pred || t == Task::sim_song; }

// Joint embedding model: artist columns A, tag columns T, and the linear
// song map V with each column 2-norm bounded by C.
struct EmbeddingModel {
  std::int32_t d = 0;
  float C = 1.0f;
  ColMat artists;   // d x |A|
  ColMat tags;      // d x |T|
  ColMat song_map;  // d x |S|

  std::int32_t n_artists() const { return artists.n; }
  std::int32_t n_tags() const { return tags.n; }
  std::int32_t feat_dim() const { return song_map.n; }

  bool operator==(const EmbeddingModel&) const = default;
};

// ---------------------------------------------------------------------------
// scoring kernels

inline double dot_col(std::span<const double> e, const ColMat& m, std::int32_t i) {
  const float* c = m.col(i);
  double acc = 0.0;
  for (std::int32_t t = 0; t < m.d; ++t) acc += e[t] * static_cast<double>(c[t]);
  opcount::add(static_cast<std::uint64_t>(m.d));
  return acc;
}

// V s': accumulates nnz(s') scaled columns of the song map.
inline std::vector<double> embed_song(const EmbeddingModel& m, const SparseVector& s) {
  if (s.dim != m.feat_dim())
    throw data_error("embed_song: feature dim " + std::to_string(s.dim) + " != model |S| " +
                     std::to_string(m.feat_dim()));
  std::vector<double> e(m.d, 0.0);
  for (std::size_t k = 0; k < s.idx.size(); ++k) {
    const float* c = m.song_map.col(s.idx[k]);
    double v = s.val[k];
    for (std::int32_t t = 0; t < m.d; ++t) e[t] += v * static_cast<double>(c[t]);
  }
  opcount::add(s.nnz() * static_cast<std::uint64_t>(m.d));
  return e;
}

inline std::vector<double> copy_col(const ColMat& m, std::int32_t i) {
  const float* c = m.col(i);
  return std::vector<double>(c, c + m.d);
}

// Query side of a task: song features for ap/ss/tp, artist id for sp/sa.
struct Query {
  const SparseVector* feats = nullptr;
  std::int32_t id = -1;

  static Query song(const SparseVector& s) { return Query{&s, -1}; }
  static Query artist(std::int32_t id) { return Query{nullptr, id}; }
};

// Candidate side: a label id (artist/tag) for ap/sa/tp, song features for sp/ss.
struct Candidate {
  const SparseVector* feats = nullptr;
  std::int32_t id = -1;

  static Candidate label(std::int32_t id) { return Candidate{nullptr, id}; }
  static Candidate song(const SparseVector& s) { return Candidate{&s, -1}; }
};

namespace detail {

inline void check_id(std::int32_t id, std::int32_t n, const char* what) {
  if (id < 0 || id >= n)
    throw data_error(std::string(what) + " id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(n) + ")");
}

// embeds or copies the task's query into the shared space
inline std::vector<double> query_embedding(const EmbeddingModel& m, Task t, const Query& q) {
  if (task_query_is_song(t)) {
    if (!q.feats) throw data_error("task expects song features as query");
    return embed_song(m, *q.feats);
  }
  if (q.id < 0) throw data_error("task expects an artist id as query");
  check_id(q.id, m.n_artists(), "artist");
  return copy_col(m.artists, q.id);
}

}  // namespace detail

// Dot-product score of one (query, candidate) pair under the given task.
inline double score(const EmbeddingModel& m, Task t, const Query& q, const Candidate& c) {
  std::vector<double> e = detail::query_embedding(m, t, q);
  switch (t) {
    case Task::artist_pred:
    case Task::sim_artist:
      if (c.id < 0) throw data_error("task ranks artist ids");
      detail::check_id(c.id, m.n_artists(), "artist");
      return dot_col(e, m.artists, c.id);
    case Task::tag_pred:
      if (c.id < 0) throw data_error("task ranks tag ids");
      detail::check_id(c.id, m.n_tags(), "tag");
      return dot_col(e, m.tags, c.id);
    case Task::song_pred:
    case Task::sim_song: {
      if (!c.feats) throw data_error("task ranks songs; candidate must carry features");
      std::vector<double> ec = embed_song(m, *c.feats);
      double acc = 0.0;
      for (std::int32_t t2 = 0; t2 < m.d; ++t2) acc += e[t2] * ec[t2];
      opcount::add(static_cast<std::uint64_t>(m.d));
      return acc;
    }
  }
  throw data_error("unknown task");
}

// Precomputed song embeddings for tasks whose label universe is a song
// corpus. Built once per (model, corpus); queries then cost (Y + nnz) * d.
struct SongIndex {
  std::int32_t d = 0;
  std::int32_t n = 0;
  std::vector<double> emb;  // column-major d x n

  const double* col(std::int32_t i) const { return emb.data() + static_cast<std::size_t>(i) * d; }
};

inline SongIndex build_song_index(const EmbeddingModel& m, const Dataset& corpus) {
  SongIndex ix;
  ix.d = m.d;
  ix.n = static_cast<std::int32_t>(corpus.records.size());
  ix.emb.resize(static_cast<std::size_t>(ix.d) * ix.n);
  for (std::int32_t i = 0; i < ix.n; ++i) {
    std::vector<double> e = embed_song(m, corpus.records[i].features);
    std::copy(e.begin(), e.end(), ix.emb.begin() + static_cast<std::size_t>(i) * ix.d);
  }
  return ix;
}

namespace detail {

inline void score_universe(const EmbeddingModel& m, Task t, std::span<const double> e,
                           const SongIndex* songs, std::vector<double>& scores) {
  if (task_ranks_songs(t)) {
    if (!songs) throw data_error("ranking songs requires a song index");
    if (songs->d != m.d) throw data_error("song index dimension mismatch");
    for (std::int32_t i = 0; i < songs->n; ++i) {
      const double* c = songs->col(i);
      double acc = 0.0;
      for (std::int32_t k = 0; k < m.d; ++k) acc += e[k] * c[k];
      scores[i] += acc;
    }
    opcount::add(static_cast<std::uint64_t>(songs->n) * m.d);
    return;
  }
  const ColMat& mat = (t == Task::tag_pred) ? m.tags : m.artists;
  for (std::int32_t i = 0; i < mat.n; ++i) scores[i] += dot_col(e, mat, i);
}

}  // namespace detail

// Scores the full label universe and returns the top-K list. For the two
// "similar" tasks the query never appears in its own result: sa removes the
// query artist id, ss removes exclude_song (the query's corpus position).
inline RankedList rank_all(const EmbeddingModel& m, Task t, const Query& q, std::size_t K,
                           const SongIndex* songs = nullptr, std::int32_t exclude_song = -1) {
  if (K < 1) throw data_error("rank_all: K must be >= 1");
  std::vector<double> e = detail::query_embedding(m, t, q);
  std::size_t universe = task_ranks_songs(t) ? (songs ? songs->n : 0)
                         : (t == Task::tag_pred ? m.n_tags() : m.n_artists());
  std::vector<double> scores(universe, 0.0);
  detail::score_universe(m, t, e, songs, scores);
  std::int32_t exclude = -1;
  if (t == Task::sim_artist) exclude = q.id;
  if (t == Task::sim_song) exclude = exclude_song;
  return top_k(scores, K, exclude);
}

// ---------------------------------------------------------------------------
// norm-ball projection

namespace detail {
// Relative slack on the squared norm below which a column is left untouched,
// which keeps the projection idempotent under float rounding.
inline constexpr double kProjSlack = 3e-7;
}  // namespace detail

// Rescales the column to norm C when it exceeds the ball; direction preserved.
inline void project_column(ColMat& m, std::int32_t i, double C) {
  float* c = m.col(i);
  double n2 = 0.0;
  for (std::int32_t t = 0; t < m.d; ++t)
    n2 += static_cast<double>(c[t]) * static_cast<double>(c[t]);
  if (n2 > C * C * (1.0 + detail::kProjSlack)) {
    double f = C / std::sqrt(n2);
    for (std::int32_t t = 0; t < m.d; ++t) c[t] = static_cast<float>(c[t] * f);
  }
}

inline void project_matrix(ColMat& m, double C) {
  for (std::int32_t i = 0; i < m.n; ++i) project_column(m, i, C);
}

// Full projection pass over A, T, V.
inline void project_columns(EmbeddingModel& m) {
  project_matrix(m.artists, m.C);
  project_matrix(m.tags, m.C);
  project_matrix(m.song_map, m.C);
}

inline double max_column_norm(const ColMat& m) {
  double best = 0.0;
  for (std::int32_t i = 0; i < m.n; ++i) {
    const float* c = m.col(i);
    double n2 = 0.0;
    for (std::int32_t t = 0; t < m.d; ++t)
      n2 += static_cast<double>(c[t]) * static_cast<double>(c[t]);
    best = std::max(best, n2);
  }
  return std::sqrt(best);
}

inline double max_column_norm(const EmbeddingModel& m) {
  return std::max({max_column_norm(m.artists), max_column_norm(m.tags),
                   max_column_norm(m.song_map)});
}

// ---------------------------------------------------------------------------
// ensembles

inline void check_ensemble_compatible(std::span<const EmbeddingModel> models) {
  if (models.empty()) throw data_error("empty ensemble");
  for (const EmbeddingModel& m : models) {
    if (m.n_artists() != models[0].n_artists() || m.n_tags() != models[0].n_tags() ||
        m.feat_dim() != models[0].feat_dim())
      throw data_error("ensemble members disagree on label universe sizes");
  }
}

// Sum of the members' scores. Members may have different d; summing keeps
// the combined ranking identical to averaging.
inline double ensemble_score(std::span<const EmbeddingModel> models, Task t, const Query& q,
                             const Candidate& c) {
  check_ensemble_compatible(models);
  double acc = 0.0;
  for (const EmbeddingModel& m : models) acc += score(m, t, q, c);
  return acc;
}

// rank_all over summed member scores; song_indexes must be given per member
// (in order) when the task ranks songs.
inline RankedList rank_all_ensemble(std::span<const EmbeddingModel> models, Task t, const Query& q,
                                    std::size_t K, std::span<const SongIndex> song_indexes = {},
                                    std::int32_t exclude_song = -1) {
  check_ensemble_compatible(models);
  if (K < 1) throw data_error("rank_all: K must be >= 1");
  std::size_t universe = task_ranks_songs(t)
                             ? (song_indexes.empty() ? 0 : song_indexes[0].n)
                             : (t == Task::tag_pred ? models[0].n_tags() : models[0].n_artists());
  std::vector<double> scores(universe, 0.0);
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const EmbeddingModel& m = models[mi];
    std::vector<double> e = detail::query_embedding(m, t, q);
    const SongIndex* songs = task_ranks_songs(t) ? &song_indexes[mi] : nullptr;
    detail::score_universe(m, t, e, songs, scores);
  }
  std::int32_t exclude = -1;
  if (t == Task::sim_artist) exclude = q.id;
  if (t == Task::sim_song) exclude = exclude_song;
  return top_k(scores, K, exclude);
}

// ---------------------------------------------------------------------------
// model file: magic MUSL, version, dims, C, then A, T, V as row-major f32

inline constexpr char kModelMagic[5] = "MUSL";
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void write_mat_row_major(std::ostream& os, const ColMat& m) {
  for (std::int32_t r = 0; r < m.d; ++r)
    for (std::int32_t c = 0; c < m.n; ++c) io::write_f32(os, m.a[static_cast<std::size_t>(c) * m.d + r]);
}

inline ColMat read_mat_row_major(std::istream& is, std::int32_t d, std::int32_t n,
                                 const char* what) {
  ColMat m = ColMat::zeros(d, n);
  for (std::int32_t r = 0; r < d; ++r)
    for (std::int32_t c = 0; c < n; ++c) {
      float v = io::read_f32(is, what);
      if (!std::isfinite(v)) throw data_error(std::string(what) + ": non-finite value");
      m.a[static_cast<std::size_t>(c) * d + r] = v;
    }
  return m;
}

}  // namespace detail

inline void write_model(std::ostream& os, const EmbeddingModel& m) {
  io::write_magic(os, kModelMagic);
  io::write_u32(os, kModelVersion);
  io::write_u32(os, static_cast<std::uint32_t>(m.d));
  io::write_u32(os, static_cast<std::uint32_t>(m.n_artists()));
  io::write_u32(os, static_cast<std::uint32_t>(m.n_tags()));
  io::write_u32(os, static_cast<std::uint32_t>(m.feat_dim()));
  io::write_f32(os, m.C);
  detail::write_mat_row_major(os, m.artists);
  detail::write_mat_row_major(os, m.tags);
  detail::write_mat_row_major(os, m.song_map);
}

inline void save_model(const std::string& path, const EmbeddingModel& m) {
  auto os = io::open_out(path);
  write_model(os, m);
  if (!os) throw io_error("write failed: " + path);
}

inline EmbeddingModel read_model(std::istream& is) {
  io::expect_magic(is, kModelMagic, "model");
  std::uint32_t ver = io::read_u32(is, "model version");
  if (ver != kModelVersion)
    throw io_error("unsupported model version " + std::to_string(ver));
  EmbeddingModel m;
  m.d = static_cast<std::int32_t>(io::read_u32(is, "model d"));
  std::int32_t na = static_cast<std::int32_t>(io::read_u32(is, "model |A|"));
  std::int32_t nt = static_cast<std::int32_t>(io::read_u32(is, "model |T|"));
  std::int32_t ns = static_cast<std::int32_t>(io::read_u32(is, "model |S|"));
  if (m.d < 1) throw data_error("model d must be >= 1");
  m.C = io::read_f32(is, "model C");
  if (!(m.C > 0.0f) || !std::isfinite(m.C)) throw data_error("model C must be positive");
  m.artists = detail::read_mat_row_major(is, m.d, na, "artist matrix");
  m.tags = detail::read_mat_row_major(is, m.d, nt, "tag matrix");
  m.song_map = detail::read_mat_row_major(is, m.d, ns, "song map");
  return m;
}

inline EmbeddingModel load_model(const std::string& path) {
  auto is = io::open_in(path);
  return read_model(is);
}

}  // namespace musemb
