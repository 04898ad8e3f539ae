#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "musemb/artist_sim.hpp"
#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/model.hpp"
#include "musemb/ranking.hpp"

namespace musemb {

// |top-k of ranked ∩ relevant| / k. The denominator stays k even when fewer
// than k relevant items exist, so attainable precision is capped.
inline double precision_at_k(const RankedList& ranked,
                             std::span<const std::int32_t> relevant_sorted,
                             std::int32_t k) {
  if (k < 1) throw data_error("precision_at_k: k must be >= 1");
  std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.items.size());
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < top; ++i)
    if (std::binary_search(relevant_sorted.begin(), relevant_sorted.end(), ranked.items[i].id))
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

// Per-task evaluation summary. Queries whose relevance set is empty are
// skipped rather than scored zero, and counted in n_skipped.
struct TaskEval {
  Task task{};
  std::vector<std::int32_t> ks;      // sorted ascending
  std::vector<double> precision;     // mean p@k, parallel to ks
  std::int64_t n_queries = 0;        // scored queries
  std::int64_t n_skipped = 0;        // empty-relevance queries
};

struct EvalResult {
  std::vector<TaskEval> tasks;

  const TaskEval* find(Task t) const {
    for (const auto& te : tasks)
      if (te.task == t) return &te;
    return nullptr;
  }
};

namespace detail {

inline std::vector<std::int32_t> normalize_ks(std::span<const std::int32_t> ks) {
  std::vector<std::int32_t> out(ks.begin(), ks.end());
  for (std::int32_t k : out)
    if (k < 1) throw data_error("evaluate: k must be >= 1");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw data_error("evaluate: empty k list");
  return out;
}

struct EvalAccum {
  std::vector<double> sums;
  std::int64_t n = 0, skipped = 0;

  explicit EvalAccum(std::size_t n_ks) : sums(n_ks, 0.0) {}

  void add(const RankedList& ranked, std::span<const std::int32_t> relevant,
           std::span<const std::int32_t> ks) {
    for (std::size_t i = 0; i < ks.size(); ++i)
      sums[i] += precision_at_k(ranked, relevant, ks[i]);
    ++n;
  }
};

}  // namespace detail

// Ranks every valid query of every requested task over `test` and averages
// precision@k. Works for a single model (span of one) or an ensemble; the
// similar-artist task needs ground-truth neighborhoods via `sim`.
inline EvalResult evaluate(std::span<const EmbeddingModel> models, const Dataset& test,
                           std::span<const Task> tasks, std::span<const std::int32_t> ks_in,
                           const ArtistSim* sim = nullptr) {
  if (models.empty()) throw data_error("evaluate: no models");
  check_ensemble_compatible(models);
  const EmbeddingModel& head = models.front();
  if (test.n_artists != head.n_artists() || test.n_tags != head.n_tags() ||
      test.feat_dim != head.feat_dim())
    throw data_error("evaluate: dataset dimensions do not match the model");

  std::vector<std::int32_t> ks = detail::normalize_ks(ks_in);
  std::int32_t max_k = ks.back();

  bool needs_songs = false;
  for (Task t : tasks) needs_songs = needs_songs || task_ranks_songs(t);
  std::vector<SongIndex> song_ix;
  if (needs_songs) {
    song_ix.reserve(models.size());
    for (const auto& m : models) song_ix.push_back(build_song_index(m, test));
  }

  CorpusIndex cix;
  bool needs_cix = false;
  for (Task t : tasks)
    needs_cix = needs_cix || t == Task::song_pred || t == Task::sim_song;
  if (needs_cix) cix = build_corpus_index(test);

  auto rank = [&](Task t, Query q, std::int32_t exclude_song) {
    return rank_all_ensemble(models, t, q, static_cast<std::size_t>(max_k),
                             song_ix.empty() ? std::span<const SongIndex>{}
                                             : std::span<const SongIndex>(song_ix),
                             exclude_song);
  };

  EvalResult result;
  for (Task t : tasks) {
    detail::EvalAccum acc(ks.size());
    switch (t) {
      case Task::artist_pred:
        for (const auto& rec : test.records) {
          if (rec.artists.empty()) { ++acc.skipped; continue; }
          acc.add(rank(t, Query::song(rec.features), -1), rec.artists, ks);
        }
        break;
      case Task::tag_pred:
        for (const auto& rec : test.records) {
          if (rec.tags.empty()) { ++acc.skipped; continue; }
          acc.add(rank(t, Query::song(rec.features), -1), rec.tags, ks);
        }
        break;
      case Task::song_pred:
        for (std::int32_t a = 0; a < test.n_artists; ++a) {
          const auto& rel = cix.songs_by_artist[static_cast<std::size_t>(a)];
          if (rel.empty()) { ++acc.skipped; continue; }
          acc.add(rank(t, Query::artist(a), -1), rel, ks);
        }
        break;
      case Task::sim_song:
        for (std::size_t i = 0; i < test.records.size(); ++i) {
          const auto& rel = cix.same_artist_others[i];
          if (rel.empty()) { ++acc.skipped; continue; }
          acc.add(rank(t, Query::song(test.records[i].features), static_cast<std::int32_t>(i)),
                  rel, ks);
        }
        break;
      case Task::sim_artist: {
        if (!sim) throw data_error("task sa requires artist similarity data");
        if (sim->n_artists() != test.n_artists)
          throw data_error("evaluate: artist-sim size does not match dataset");
        for (std::int32_t a = 0; a < test.n_artists; ++a) {
          const auto& rel = sim->neighbors[static_cast<std::size_t>(a)];
          if (rel.empty()) { ++acc.skipped; continue; }
          acc.add(rank(t, Query::artist(a), -1), rel, ks);
        }
        break;
      }
    }
    if (acc.n == 0)
      throw data_error("evaluate: no valid queries for task " + std::string(task_name(t)));
    TaskEval te;
    te.task = t;
    te.ks = ks;
    te.precision.resize(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      te.precision[i] = acc.sums[i] / static_cast<double>(acc.n);
    te.n_queries = acc.n;
    te.n_skipped = acc.skipped;
    result.tasks.push_back(std::move(te));
  }
  return result;
}

inline EvalResult evaluate(const EmbeddingModel& model, const Dataset& test,
                           std::span<const Task> tasks, std::span<const std::int32_t> ks,
                           const ArtistSim* sim = nullptr) {
  return evaluate(std::span<const EmbeddingModel>(&model, 1), test, tasks, ks, sim);
}

// One emitted report row; baselines reuse this with their own task names.
struct ReportRow {
  std::string task;
  std::int32_t k = 0;
  double precision = 0.0;
  std::int64_t n_queries = 0;
};

inline std::vector<ReportRow> to_rows(const EvalResult& r) {
  std::vector<ReportRow> rows;
  for (const auto& te : r.tasks)
    for (std::size_t i = 0; i < te.ks.size(); ++i)
      rows.push_back({std::string(task_name(te.task)), te.ks[i], te.precision[i], te.n_queries});
  return rows;
}

// TSV report: '#'-prefixed header lines, then task TAB k TAB precision TAB
// n_queries. Floats use shortest round-trip formatting so identical runs
// emit identical bytes.
inline void write_report(std::ostream& out, std::span<const ReportRow> rows,
                         std::span<const std::string> header_lines) {
  for (const auto& h : header_lines) out << "# " << h << '\n';
  out << "task\tk\tprecision\tn_queries\n";
  for (const auto& r : rows)
    out << r.task << '\t' << r.k << '\t' << detail::format_float(r.precision) << '\t'
        << r.n_queries << '\n';
}

// Fixed-width table for humans: one row per task, one column per k.
inline std::string format_table(std::span<const ReportRow> rows) {
  std::vector<std::int32_t> ks;
  std::vector<std::string> tasks;
  for (const auto& r : rows) {
    if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  std::sort(ks.begin(), ks.end());

  std::ostringstream os;
  os << std::left << std::setw(10) << "task";
  for (std::int32_t k : ks) os << std::right << std::setw(10) << ("p@" + std::to_string(k));
  os << std::right << std::setw(10) << "queries" << '\n';
  for (const auto& t : tasks) {
    os << std::left << std::setw(10) << t;
    std::int64_t n = 0;
    for (std::int32_t k : ks) {
      bool found = false;
      for (const auto& r : rows)
        if (r.task == t && r.k == k) {
          os << std::right << std::setw(10) << std::fixed << std::setprecision(4) << r.precision;
          n = r.n_queries;
          found = true;
          break;
        }
      if (!found) os << std::right << std::setw(10) << "-";
    }
    os << std::right << std::setw(10) << n << '\n';
  }
  return os.str();
}

}  // namespace musemb
