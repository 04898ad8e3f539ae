#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/evaluation.hpp"
#include "musemb/io_util.hpp"
#include "musemb/opcount.hpp"
#include "musemb/ranking.hpp"
#include "musemb/rng.hpp"
#include "musemb/sparse_vector.hpp"

namespace musemb {

enum class LabelKind { tag, artist };

inline const char* label_kind_name(LabelKind k) { return k == LabelKind::tag ? "tag" : "artist"; }

inline LabelKind parse_label_kind(const std::string& s) {
  if (s == "tag") return LabelKind::tag;
  if (s == "artist") return LabelKind::artist;
  throw data_error("unknown label kind: " + s);
}

inline std::span<const std::int32_t> record_labels(const SongRecord& rec, LabelKind kind) {
  return kind == LabelKind::tag ? std::span<const std::int32_t>(rec.tags)
                                : std::span<const std::int32_t>(rec.artists);
}

// One linear scorer w_i per label, f_i(x) = w_i . x. Full-rank baseline: needs
// Y * |S| parameters where the embedding model needs (Y + |S|) * d.
struct OvrModel {
  std::int32_t n_labels = 0;
  std::int32_t feat_dim = 0;
  LabelKind kind = LabelKind::tag;
  std::vector<float> w;  // row-major, one row per label

  static OvrModel zeros(std::int32_t n_labels, std::int32_t feat_dim, LabelKind kind) {
    if (n_labels < 1 || feat_dim < 1) throw data_error("OvrModel: invalid dimensions");
    OvrModel m;
    m.n_labels = n_labels;
    m.feat_dim = feat_dim;
    m.kind = kind;
    m.w.assign(static_cast<std::size_t>(n_labels) * static_cast<std::size_t>(feat_dim), 0.0f);
    return m;
  }

  const float* row(std::int32_t i) const {
    return w.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(feat_dim);
  }
  float* row(std::int32_t i) {
    return w.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(feat_dim);
  }

  bool operator==(const OvrModel&) const = default;
};

inline double ovr_score(const OvrModel& m, std::int32_t label, const SparseVector& s) {
  if (s.dim != m.feat_dim) throw data_error("ovr_score: feature dimension mismatch");
  const float* w = m.row(label);
  double acc = 0.0;
  for (std::int32_t t = 0; t < s.nnz(); ++t)
    acc += static_cast<double>(w[s.idx[static_cast<std::size_t>(t)]]) *
           static_cast<double>(s.val[static_cast<std::size_t>(t)]);
  opcount::add(static_cast<std::uint64_t>(s.nnz()));
  return acc;
}

// Total margin-perceptron objective: sum over examples and labels of
// max(0, 1 - phi * w_j . s) with phi = +1 for the example's labels, -1
// otherwise.
inline double ovr_hinge_loss(const OvrModel& m, const Dataset& data) {
  double total = 0.0;
  for (const auto& rec : data.records) {
    auto labels = record_labels(rec, m.kind);
    for (std::int32_t j = 0; j < m.n_labels; ++j) {
      double phi = std::binary_search(labels.begin(), labels.end(), j) ? 1.0 : -1.0;
      total += std::max(0.0, 1.0 - phi * ovr_score(m, j, rec.features));
    }
  }
  return total;
}

// One shuffled pass of margin-perceptron updates: for every example and
// every label, if the margin is violated, w_j += gamma * phi * s.
inline void ovr_train_epoch(OvrModel& m, const Dataset& data, double gamma, Rng& rng) {
  std::vector<std::int32_t> order(data.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1],
              order[static_cast<std::size_t>(rng.bounded(static_cast<std::int64_t>(i)))]);

  for (std::int32_t oi : order) {
    const auto& rec = data.records[static_cast<std::size_t>(oi)];
    auto labels = record_labels(rec, m.kind);
    const SparseVector& s = rec.features;
    for (std::int32_t j = 0; j < m.n_labels; ++j) {
      double phi = std::binary_search(labels.begin(), labels.end(), j) ? 1.0 : -1.0;
      if (1.0 - phi * ovr_score(m, j, s) <= 0.0) continue;
      float* w = m.row(j);
      for (std::int32_t t = 0; t < s.nnz(); ++t) {
        std::size_t c = static_cast<std::size_t>(s.idx[static_cast<std::size_t>(t)]);
        w[c] = static_cast<float>(static_cast<double>(w[c]) +
                                  gamma * phi *
                                      static_cast<double>(s.val[static_cast<std::size_t>(t)]));
      }
    }
  }
}

inline OvrModel ovr_train(const Dataset& data, LabelKind kind, std::int32_t epochs, double gamma,
                          Rng& rng) {
  if (epochs < 0) throw data_error("ovr_train: epochs must be >= 0");
  std::int32_t n_labels = kind == LabelKind::tag ? data.n_tags : data.n_artists;
  if (n_labels < 1) throw data_error("ovr_train: dataset has no labels of the chosen kind");
  bool any = false;
  for (const auto& rec : data.records) any = any || !record_labels(rec, kind).empty();
  if (!any) throw data_error("ovr_train: no labeled examples");

  OvrModel m = OvrModel::zeros(n_labels, data.feat_dim, kind);
  for (std::int32_t e = 0; e < epochs; ++e) ovr_train_epoch(m, data, gamma, rng);
  return m;
}

inline RankedList ovr_rank(const OvrModel& m, const SparseVector& s, std::size_t K) {
  std::vector<double> scores(static_cast<std::size_t>(m.n_labels));
  for (std::int32_t j = 0; j < m.n_labels; ++j)
    scores[static_cast<std::size_t>(j)] = ovr_score(m, j, s);
  return top_k(scores, K);
}

// Cosine similarity against every corpus item; zero-norm items score 0, and
// the query's own corpus slot (if any) is left out of the ranking.
inline RankedList cosine_rank(const SparseVector& query, std::span<const SparseVector> corpus,
                              std::size_t K, std::int32_t self_index = -1) {
  double qn = norm(query);
  if (qn == 0.0) throw data_error("cosine_rank: zero query vector");
  std::vector<double> scores(corpus.size(), 0.0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (static_cast<std::int32_t>(i) == self_index) continue;
    double cn = norm(corpus[i]);
    if (cn == 0.0) continue;
    scores[i] = dot(query, corpus[i]) / (qn * cn);
  }
  return top_k(scores, K, self_index);
}

// ovr model file: magic, label count, feature dim, then W row-major f32.
inline constexpr char kOvrMagic[5] = "OVR1";

inline void write_ovr(std::ostream& out, const OvrModel& m) {
  io::write_magic(out, kOvrMagic);
  io::write_u32(out, static_cast<std::uint32_t>(m.n_labels));
  io::write_u32(out, static_cast<std::uint32_t>(m.feat_dim));
  for (float v : m.w) io::write_f32(out, v);
}

inline OvrModel read_ovr(std::istream& in, LabelKind kind) {
  io::expect_magic(in, kOvrMagic, "ovr model");
  std::uint32_t y = io::read_u32(in, "ovr label count");
  std::uint32_t sd = io::read_u32(in, "ovr feature dim");
  if (y < 1 || sd < 1) throw data_error("ovr model: invalid dimensions");
  OvrModel m = OvrModel::zeros(static_cast<std::int32_t>(y), static_cast<std::int32_t>(sd), kind);
  for (float& v : m.w) {
    v = io::read_f32(in, "ovr weights");
    if (!std::isfinite(v)) throw data_error("ovr model: non-finite weight");
  }
  return m;
}

inline void save_ovr(const std::string& path, const OvrModel& m) {
  auto out = io::open_out(path);
  write_ovr(out, m);
  if (!out) throw io_error("write failed: " + path);
}

inline OvrModel load_ovr(const std::string& path, LabelKind kind) {
  auto in = io::open_in(path);
  return read_ovr(in, kind);
}

// Precision@k of the one-vs-rest ranker on a test set; one query per record
// with labels of the model's kind.
inline EvalResult evaluate_ovr(const OvrModel& m, const Dataset& test,
                               std::span<const std::int32_t> ks_in) {
  std::int32_t want = m.kind == LabelKind::tag ? test.n_tags : test.n_artists;
  if (want != m.n_labels || test.feat_dim != m.feat_dim)
    throw data_error("evaluate_ovr: dataset dimensions do not match the model");
  std::vector<std::int32_t> ks = detail::normalize_ks(ks_in);
  detail::EvalAccum acc(ks.size());
  for (const auto& rec : test.records) {
    auto labels = record_labels(rec, m.kind);
    if (labels.empty()) { ++acc.skipped; continue; }
    acc.add(ovr_rank(m, rec.features, static_cast<std::size_t>(ks.back())), labels, ks);
  }
  if (acc.n == 0) throw data_error("evaluate_ovr: no valid queries");
  TaskEval te;
  te.task = m.kind == LabelKind::tag ? Task::tag_pred : Task::artist_pred;
  te.ks = ks;
  for (std::size_t i = 0; i < ks.size(); ++i)
    te.precision.push_back(acc.sums[i] / static_cast<double>(acc.n));
  te.n_queries = acc.n;
  te.n_skipped = acc.skipped;
  EvalResult r;
  r.tasks.push_back(std::move(te));
  return r;
}

// Cosine ranking evaluated as song similarity: query every song against the
// corpus, relevance = other songs sharing an artist.
inline EvalResult evaluate_cosine(const Dataset& test, std::span<const std::int32_t> ks_in) {
  std::vector<std::int32_t> ks = detail::normalize_ks(ks_in);
  CorpusIndex cix = build_corpus_index(test);
  std::vector<SparseVector> corpus;
  corpus.reserve(test.records.size());
  for (const auto& rec : test.records) corpus.push_back(rec.features);

  detail::EvalAccum acc(ks.size());
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    const auto& rel = cix.same_artist_others[i];
    if (rel.empty() || norm(corpus[i]) == 0.0) { ++acc.skipped; continue; }
    acc.add(cosine_rank(corpus[i], corpus, static_cast<std::size_t>(ks.back()),
                        static_cast<std::int32_t>(i)),
            rel, ks);
  }
  if (acc.n == 0) throw data_error("evaluate_cosine: no valid queries");
  TaskEval te;
  te.task = Task::sim_song;
  te.ks = ks;
  for (std::size_t i = 0; i < ks.size(); ++i)
    te.precision.push_back(acc.sums[i] / static_cast<double>(acc.n));
  te.n_queries = acc.n;
  te.n_skipped = acc.skipped;
  EvalResult r;
  r.tasks.push_back(std::move(te));
  return r;
}

}  // namespace musemb
