#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "musemb/artist_sim.hpp"
#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/evaluation.hpp"
#include "musemb/losses.hpp"
#include "musemb/model.hpp"
#include "musemb/rng.hpp"

namespace musemb {

enum class Loss { warp, auc };

inline const char* loss_name(Loss l) { return l == Loss::warp ? "warp" : "auc"; }

inline Loss parse_loss(const std::string& s) {
  if (s == "warp") return Loss::warp;
  if (s == "auc") return Loss::auc;
  throw data_error("unknown loss: " + s);
}

struct TrainConfig {
  std::vector<Task> tasks;
  Loss loss = Loss::warp;
  AlphaScheme alpha = AlphaScheme::harmonic();
  std::int32_t d = 100;
  float C = 1.0f;
  double gamma = 0.01;
  std::int64_t max_steps = 100000;
  std::int64_t eval_every = 0;  // 0: 10 * |train|
  std::int64_t patience = 10;
  std::uint64_t seed = 42;
  std::int32_t k_eval = 1;
};

// Gaussian init, entries i.i.d. N(0, 1/sqrt(d)), then all columns projected
// into the norm ball.
inline EmbeddingModel init_model(std::int32_t d, std::int32_t n_artists, std::int32_t n_tags,
                                 std::int32_t feat_dim, float C, Rng& rng) {
  if (d < 1 || n_artists < 0 || n_tags < 0 || feat_dim < 1)
    throw data_error("init_model: invalid dimensions");
  if (!(C > 0.0f)) throw data_error("init_model: C must be > 0");
  EmbeddingModel m;
  m.d = d;
  m.C = C;
  m.artists = ColMat::zeros(d, n_artists);
  m.tags = ColMat::zeros(d, n_tags);
  m.song_map = ColMat::zeros(d, feat_dim);
  double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (ColMat* mat : {&m.artists, &m.tags, &m.song_map})
    for (float& v : mat->a) v = static_cast<float>(rng.gaussian(0.0, sd));
  project_columns(m);
  return m;
}

// One training example: the query input, its positive labels, and the label
// universe the negatives are drawn from. `excluded` (sorted, superset of
// positives) is what negative sampling must never draw; for the similar
// tasks it additionally contains the query itself. For song-ranking tasks
// the candidate labels are song feature vectors from `corpus`.
struct TaskExample {
  Task task{};
  const SparseVector* query_feats = nullptr;  // ap, tp, ss
  std::int32_t query_id = -1;                 // sa, sp: artist id; ss: own song index
  std::span<const std::int32_t> positives;
  std::span<const std::int32_t> excluded;
  std::int64_t universe = 0;
  const Dataset* corpus = nullptr;  // sp, ss
};

struct StepOutcome {
  bool updated = false;
  std::int32_t positive = -1;
  std::int32_t negative = -1;
  double weight = 0.0;  // effective step scale (gamma times the rank weight)
  std::int64_t trials = 0;
};

namespace detail {

inline void axpy_col(ColMat& m, std::int32_t c, double s, std::span<const double> v) {
  float* col = m.col(c);
  for (std::int32_t r = 0; r < m.d; ++r)
    col[r] = static_cast<float>(static_cast<double>(col[r]) + s * v[static_cast<std::size_t>(r)]);
}

inline std::vector<double> col_copy(const ColMat& m, std::int32_t c) {
  std::vector<double> out(static_cast<std::size_t>(m.d));
  const float* col = m.col(c);
  for (std::int32_t r = 0; r < m.d; ++r) out[static_cast<std::size_t>(r)] = col[r];
  return out;
}

inline void project_touched(EmbeddingModel& m, ColMat& mat, std::vector<std::int32_t>& cols) {
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  for (std::int32_t c : cols) project_column(mat, c, m.C);
}

}  // namespace detail

// One stochastic update: pick a random positive, hunt for a margin violator
// among the negatives, and if one is found take a subgradient step on the
// violated hinge, scaled by gamma (AUC) or gamma * L(estimated rank) (WARP).
// Only the columns entering f_j and f_k and the V-columns of the nonzero
// input features move; touched columns are re-projected.
inline StepOutcome sgd_step(EmbeddingModel& m, const TaskExample& ex, Loss loss,
                            const AlphaScheme& alpha, double gamma, Rng& rng) {
  if (ex.positives.empty()) throw data_error("sgd_step: example has no positive labels");
  if (ex.universe < 2) throw data_error("sgd_step: label universe too small");

  std::int32_t j = ex.positives[static_cast<std::size_t>(
      rng.bounded(static_cast<std::int64_t>(ex.positives.size())))];

  // Query embedding and candidate scorer, all against the pre-step
  // parameters.
  std::vector<double> e_q;
  std::function<double(std::int32_t)> score_fn;
  switch (ex.task) {
    case Task::artist_pred:
      e_q = embed_song(m, *ex.query_feats);
      score_fn = [&](std::int32_t k) { return dot_col(e_q, m.artists, k); };
      break;
    case Task::tag_pred:
      e_q = embed_song(m, *ex.query_feats);
      score_fn = [&](std::int32_t k) { return dot_col(e_q, m.tags, k); };
      break;
    case Task::sim_artist:
      e_q = detail::col_copy(m.artists, ex.query_id);
      score_fn = [&](std::int32_t k) { return dot_col(e_q, m.artists, k); };
      break;
    case Task::song_pred:
      e_q = detail::col_copy(m.artists, ex.query_id);
      score_fn = [&](std::int32_t k) {
        auto e = embed_song(m, ex.corpus->records[static_cast<std::size_t>(k)].features);
        double acc = 0.0;
        for (std::int32_t r = 0; r < m.d; ++r)
          acc += e_q[static_cast<std::size_t>(r)] * e[static_cast<std::size_t>(r)];
        return acc;
      };
      break;
    case Task::sim_song:
      e_q = embed_song(m, *ex.query_feats);
      score_fn = [&](std::int32_t k) {
        auto e = embed_song(m, ex.corpus->records[static_cast<std::size_t>(k)].features);
        double acc = 0.0;
        for (std::int32_t r = 0; r < m.d; ++r)
          acc += e_q[static_cast<std::size_t>(r)] * e[static_cast<std::size_t>(r)];
        return acc;
      };
      break;
  }

  std::int32_t k = -1;
  double w = 0.0;
  std::int64_t trials = 0;
  if (loss == Loss::warp) {
    auto v = sample_violator(score_fn, ex.excluded, j, ex.universe, rng);
    if (!v) return {};
    k = v->negative;
    trials = v->trials;
    w = gamma * big_L(v->rank_estimate(), alpha);
  } else {
    std::int64_t n_negatives = ex.universe - static_cast<std::int64_t>(ex.excluded.size());
    if (n_negatives < 1) throw data_error("sgd_step: no negative labels exist");
    do {
      k = static_cast<std::int32_t>(rng.bounded(ex.universe));
    } while (std::binary_search(ex.excluded.begin(), ex.excluded.end(), k));
    trials = 1;
    if (hinge(score_fn(j), score_fn(k)) <= 0.0) return {};
    w = gamma;
  }

  std::vector<std::int32_t> touched_v, touched_out;
  auto sub = [](std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
  };

  switch (ex.task) {
    case Task::artist_pred:
    case Task::tag_pred: {
      ColMat& out = ex.task == Task::artist_pred ? m.artists : m.tags;
      auto diff = sub(detail::col_copy(out, j), detail::col_copy(out, k));
      detail::axpy_col(out, j, +w, e_q);
      detail::axpy_col(out, k, -w, e_q);
      const SparseVector& s = *ex.query_feats;
      for (std::int32_t t = 0; t < s.nnz(); ++t) {
        detail::axpy_col(m.song_map, s.idx[static_cast<std::size_t>(t)],
                         w * static_cast<double>(s.val[static_cast<std::size_t>(t)]), diff);
        touched_v.push_back(s.idx[static_cast<std::size_t>(t)]);
      }
      touched_out = {j, k};
      detail::project_touched(m, out, touched_out);
      detail::project_touched(m, m.song_map, touched_v);
      break;
    }
    case Task::sim_artist: {
      auto a_orig = e_q;  // A_query before any update
      auto diff = sub(detail::col_copy(m.artists, j), detail::col_copy(m.artists, k));
      detail::axpy_col(m.artists, j, +w, a_orig);
      detail::axpy_col(m.artists, k, -w, a_orig);
      detail::axpy_col(m.artists, ex.query_id, +w, diff);
      touched_out = {j, k, ex.query_id};
      detail::project_touched(m, m.artists, touched_out);
      break;
    }
    case Task::song_pred: {
      const SparseVector& s_j = ex.corpus->records[static_cast<std::size_t>(j)].features;
      const SparseVector& s_k = ex.corpus->records[static_cast<std::size_t>(k)].features;
      auto e_j = embed_song(m, s_j);
      auto e_k = embed_song(m, s_k);
      auto a_orig = e_q;
      detail::axpy_col(m.artists, ex.query_id, +w, sub(e_j, e_k));
      for (std::int32_t t = 0; t < s_j.nnz(); ++t) {
        detail::axpy_col(m.song_map, s_j.idx[static_cast<std::size_t>(t)],
                         +w * static_cast<double>(s_j.val[static_cast<std::size_t>(t)]), a_orig);
        touched_v.push_back(s_j.idx[static_cast<std::size_t>(t)]);
      }
      for (std::int32_t t = 0; t < s_k.nnz(); ++t) {
        detail::axpy_col(m.song_map, s_k.idx[static_cast<std::size_t>(t)],
                         -w * static_cast<double>(s_k.val[static_cast<std::size_t>(t)]), a_orig);
        touched_v.push_back(s_k.idx[static_cast<std::size_t>(t)]);
      }
      touched_out = {ex.query_id};
      detail::project_touched(m, m.artists, touched_out);
      detail::project_touched(m, m.song_map, touched_v);
      break;
    }
    case Task::sim_song: {
      const SparseVector& s_q = *ex.query_feats;
      const SparseVector& s_j = ex.corpus->records[static_cast<std::size_t>(j)].features;
      const SparseVector& s_k = ex.corpus->records[static_cast<std::size_t>(k)].features;
      auto e_j = embed_song(m, s_j);
      auto e_k = embed_song(m, s_k);
      auto diff = sub(e_j, e_k);
      for (std::int32_t t = 0; t < s_q.nnz(); ++t) {
        detail::axpy_col(m.song_map, s_q.idx[static_cast<std::size_t>(t)],
                         w * static_cast<double>(s_q.val[static_cast<std::size_t>(t)]), diff);
        touched_v.push_back(s_q.idx[static_cast<std::size_t>(t)]);
      }
      for (std::int32_t t = 0; t < s_j.nnz(); ++t) {
        detail::axpy_col(m.song_map, s_j.idx[static_cast<std::size_t>(t)],
                         +w * static_cast<double>(s_j.val[static_cast<std::size_t>(t)]), e_q);
        touched_v.push_back(s_j.idx[static_cast<std::size_t>(t)]);
      }
      for (std::int32_t t = 0; t < s_k.nnz(); ++t) {
        detail::axpy_col(m.song_map, s_k.idx[static_cast<std::size_t>(t)],
                         -w * static_cast<double>(s_k.val[static_cast<std::size_t>(t)]), e_q);
        touched_v.push_back(s_k.idx[static_cast<std::size_t>(t)]);
      }
      detail::project_touched(m, m.song_map, touched_v);
      break;
    }
  }
  return {true, j, k, w, trials};
}

struct Checkpoint {
  std::int64_t step = 0;
  std::vector<double> task_precision;  // parallel to config tasks
  double mean_precision = 0.0;
};

struct TrainReport {
  std::int64_t steps_taken = 0;
  std::vector<Checkpoint> checkpoints;
  EmbeddingModel model;  // best checkpoint by mean validation precision
  std::int64_t best_checkpoint = -1;
  double wall_seconds = 0.0;
};

namespace detail {

struct TrainIndex {
  CorpusIndex cix;
  std::vector<std::int32_t> with_artists;  // ap, sp examples
  std::vector<std::int32_t> with_tags;     // tp
  std::vector<std::int32_t> with_peers;    // ss
  std::vector<std::int32_t> sim_artists;   // sa
};

inline TrainIndex build_train_index(const Dataset& data, const ArtistSim* sim) {
  TrainIndex ix;
  ix.cix = build_corpus_index(data);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (!data.records[i].artists.empty())
      ix.with_artists.push_back(static_cast<std::int32_t>(i));
    if (!data.records[i].tags.empty()) ix.with_tags.push_back(static_cast<std::int32_t>(i));
    if (!ix.cix.same_artist_others[i].empty())
      ix.with_peers.push_back(static_cast<std::int32_t>(i));
  }
  if (sim)
    for (std::int32_t a = 0; a < sim->n_artists(); ++a)
      if (!sim->neighbors[static_cast<std::size_t>(a)].empty()) ix.sim_artists.push_back(a);
  return ix;
}

inline void check_task_usable(Task t, const TrainIndex& ix, const ArtistSim* sim,
                              const char* which) {
  bool ok = false;
  switch (t) {
    case Task::artist_pred:
    case Task::song_pred: ok = !ix.with_artists.empty(); break;
    case Task::tag_pred: ok = !ix.with_tags.empty(); break;
    case Task::sim_song: ok = !ix.with_peers.empty(); break;
    case Task::sim_artist:
      if (!sim) throw data_error("task sa requires artist similarity data");
      ok = !ix.sim_artists.empty();
      break;
  }
  if (!ok)
    throw data_error(std::string("task ") + task_name(t) + " has no usable " + which +
                     " example");
}

inline void validate_config(const TrainConfig& cfg) {
  if (cfg.tasks.empty()) throw data_error("train: no tasks configured");
  if (!(cfg.gamma > 0.0)) throw data_error("train: gamma must be > 0");
  if (!(cfg.C > 0.0f)) throw data_error("train: C must be > 0");
  if (cfg.d < 1) throw data_error("train: d must be >= 1");
  if (cfg.patience < 1) throw data_error("train: patience must be >= 1");
  if (cfg.eval_every < 0) throw data_error("train: eval_every must be >= 1 (or 0 for auto)");
  if (cfg.max_steps < 0) throw data_error("train: max_steps must be >= 0");
  if (cfg.k_eval < 1) throw data_error("train: k_eval must be >= 1");
}

}  // namespace detail

// Multi-task SGD: each step picks a task uniformly at random, then a uniform
// usable example, then one stochastic update. Every eval_every steps the
// model is fully projected and scored on the validation set; training stops
// after `patience` consecutive non-improving checks or at max_steps, and the
// best checkpoint's model is returned.
inline TrainReport train(const Dataset& train_data, const Dataset& valid, TrainConfig cfg,
                         const ArtistSim* sim = nullptr) {
  detail::validate_config(cfg);
  {
    auto t = cfg.tasks;
    std::sort(t.begin(), t.end());
    if (std::adjacent_find(t.begin(), t.end()) != t.end())
      throw data_error("train: duplicate task in config");
  }
  if (valid.records.empty()) throw data_error("train: empty validation set");
  if (train_data.n_artists != valid.n_artists || train_data.n_tags != valid.n_tags ||
      train_data.feat_dim != valid.feat_dim)
    throw data_error("train: train/validation dimension mismatch");
  for (Task t : cfg.tasks)
    if (t == Task::sim_artist && sim && sim->n_artists() != train_data.n_artists)
      throw data_error("train: artist-sim size does not match dataset");

  auto t0 = std::chrono::steady_clock::now();

  detail::TrainIndex ix = detail::build_train_index(train_data, sim);
  detail::TrainIndex vix = detail::build_train_index(valid, sim);
  for (Task t : cfg.tasks) {
    detail::check_task_usable(t, ix, sim, "training");
    detail::check_task_usable(t, vix, sim, "validation");
  }

  std::int64_t eval_every = cfg.eval_every > 0
                                ? cfg.eval_every
                                : 10 * static_cast<std::int64_t>(train_data.records.size());
  if (eval_every < 1) eval_every = 1;

  Rng rng(cfg.seed);
  EmbeddingModel model = init_model(cfg.d, train_data.n_artists, train_data.n_tags,
                                    train_data.feat_dim, cfg.C, rng);

  TrainReport report;
  report.model = model;
  double best_mean = -1.0;
  std::int64_t bad_checks = 0;
  std::int64_t n_songs = static_cast<std::int64_t>(train_data.records.size());
  std::vector<std::int32_t> excl_scratch;
  std::array<std::int32_t, 1> k_eval{cfg.k_eval};

  std::int64_t step = 0;
  for (step = 1; step <= cfg.max_steps; ++step) {
    Task t = cfg.tasks[static_cast<std::size_t>(
        rng.bounded(static_cast<std::int64_t>(cfg.tasks.size())))];
    TaskExample ex;
    ex.task = t;
    switch (t) {
      case Task::artist_pred: {
        const auto& rec = train_data.records[static_cast<std::size_t>(ix.with_artists[
            static_cast<std::size_t>(rng.bounded(static_cast<std::int64_t>(ix.with_artists.size())))])];
        ex.query_feats = &rec.features;
        ex.positives = rec.artists;
        ex.excluded = rec.artists;
        ex.universe = train_data.n_artists;
        break;
      }
      case Task::tag_pred: {
        const auto& rec = train_data.records[static_cast<std::size_t>(ix.with_tags[
            static_cast<std::size_t>(rng.bounded(static_cast<std::int64_t>(ix.with_tags.size())))])];
        ex.query_feats = &rec.features;
        ex.positives = rec.tags;
        ex.excluded = rec.tags;
        ex.universe = train_data.n_tags;
        break;
      }
      case Task::song_pred: {
        const auto& rec = train_data.records[static_cast<std::size_t>(ix.with_artists[
            static_cast<std::size_t>(rng.bounded(static_cast<std::int64_t>(ix.with_artists.size())))])];
        std::int32_t a = rec.artists[static_cast<std::size_t>(
            rng.bounded(static_cast<std::int64_t>(rec.artists.size())))];
        const auto& pos = ix.cix.songs_by_artist[static_cast<std::size_t>(a)];
        ex.query_id = a;
        ex.positives = pos;
        ex.excluded = pos;
        ex.universe = n_songs;
        ex.corpus = &train_data;
        break;
      }
      case Task::sim_song: {
        std::int32_t i = ix.with_peers[static_cast<std::size_t>(
            rng.bounded(static_cast<std::int64_t>(ix.with_peers.size())))];
        const auto& pos = ix.cix.same_artist_others[static_cast<std::size_t>(i)];
        ex.query_feats = &train_data.records[static_cast<std::size_t>(i)].features;
        ex.query_id = i;
        ex.positives = pos;
        excl_scratch.assign(pos.begin(), pos.end());
        excl_scratch.insert(
            std::lower_bound(excl_scratch.begin(), excl_scratch.end(), i), i);
        ex.excluded = excl_scratch;
        ex.universe = n_songs;
        ex.corpus = &train_data;
        break;
      }
      case Task::sim_artist: {
        std::int32_t a = ix.sim_artists[static_cast<std::size_t>(
            rng.bounded(static_cast<std::int64_t>(ix.sim_artists.size())))];
        const auto& pos = sim->neighbors[static_cast<std::size_t>(a)];
        ex.query_id = a;
        ex.positives = pos;
        excl_scratch.assign(pos.begin(), pos.end());
        excl_scratch.insert(
            std::lower_bound(excl_scratch.begin(), excl_scratch.end(), a), a);
        ex.excluded = excl_scratch;
        ex.universe = train_data.n_artists;
        break;
      }
    }
    sgd_step(model, ex, cfg.loss, cfg.alpha, cfg.gamma, rng);

    bool at_checkpoint = step % eval_every == 0 ||
                         (step == cfg.max_steps && cfg.max_steps % eval_every != 0);
    if (!at_checkpoint) continue;

    project_columns(model);
    EvalResult er = evaluate(model, valid, cfg.tasks, k_eval, sim);
    Checkpoint cp;
    cp.step = step;
    double sum = 0.0;
    for (Task t2 : cfg.tasks) {
      double p = er.find(t2)->precision[0];
      cp.task_precision.push_back(p);
      sum += p;
    }
    cp.mean_precision = sum / static_cast<double>(cfg.tasks.size());
    report.checkpoints.push_back(cp);

    if (cp.mean_precision > best_mean) {
      best_mean = cp.mean_precision;
      report.model = model;
      report.best_checkpoint = static_cast<std::int64_t>(report.checkpoints.size()) - 1;
      bad_checks = 0;
    } else if (++bad_checks >= cfg.patience) {
      break;
    }
  }
  report.steps_taken = std::min(step, cfg.max_steps);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Independent members with seeds seed+0 .. seed+(n-1); at equal dimension an
// ensemble scores by summing member scores, so three d=100 members stand in
// for one d=300 model at the same memory budget.
inline std::vector<TrainReport> train_ensemble(const Dataset& train_data, const Dataset& valid,
                                               const TrainConfig& cfg, std::int32_t n_members,
                                               std::int32_t n_threads = 1,
                                               const ArtistSim* sim = nullptr) {
  if (n_members < 1) throw data_error("train_ensemble: n_members must be >= 1");
  std::vector<TrainReport> reports(static_cast<std::size_t>(n_members));
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto run_member = [&](std::int32_t mi) {
    try {
      TrainConfig c = cfg;
      c.seed = cfg.seed + static_cast<std::uint64_t>(mi);
      reports[static_cast<std::size_t>(mi)] = train(train_data, valid, c, sim);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (n_threads <= 1 || n_members == 1) {
    for (std::int32_t mi = 0; mi < n_members; ++mi) run_member(mi);
  } else {
    std::atomic<std::int32_t> next{0};
    std::vector<std::thread> workers;
    std::int32_t n_workers = std::min(n_threads, n_members);
    for (std::int32_t wi = 0; wi < n_workers; ++wi)
      workers.emplace_back([&] {
        for (std::int32_t mi = next.fetch_add(1); mi < n_members; mi = next.fetch_add(1))
          run_member(mi);
      });
    for (auto& w : workers) w.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return reports;
}

}  // namespace musemb
