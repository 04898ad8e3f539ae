#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "musemb/musemb.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<musemb::Task> parse_tasks(const std::string& csv) {
  std::vector<musemb::Task> tasks;
  for (const auto& t : split_csv(csv)) {
    if (t.empty()) continue;
    tasks.push_back(musemb::parse_task(t));
  }
  if (tasks.empty()) throw musemb::data_error("no tasks given");
  return tasks;
}

std::vector<std::int32_t> parse_ks(const std::string& csv) {
  std::vector<std::int32_t> ks;
  for (const auto& t : split_csv(csv)) {
    if (t.empty()) continue;
    std::int32_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
      throw musemb::data_error("malformed k value '" + t + "'");
    ks.push_back(v);
  }
  if (ks.empty()) throw musemb::data_error("no k values given");
  return ks;
}

musemb::AlphaScheme parse_alpha(const std::string& name, std::int64_t k) {
  if (name == "uniform") return musemb::AlphaScheme::uniform();
  if (name == "harmonic") return musemb::AlphaScheme::harmonic();
  if (name == "patk") return musemb::AlphaScheme::precision_at_k(k);
  throw musemb::data_error("unknown alpha scheme: " + name + " (uniform|harmonic|patk)");
}

std::string alpha_str(const musemb::AlphaScheme& a) {
  switch (a.kind) {
    case musemb::AlphaScheme::Kind::uniform: return "uniform";
    case musemb::AlphaScheme::Kind::harmonic: return "harmonic";
    case musemb::AlphaScheme::Kind::precision_at_k: return "patk:" + std::to_string(a.k);
  }
  return "?";
}

std::string tasks_str(const std::vector<musemb::Task>& ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ",";
    s += musemb::task_name(ts[i]);
  }
  return s;
}

void emit_report(const std::string& out_path, const std::vector<musemb::ReportRow>& rows,
                 const std::vector<std::string>& header) {
  if (out_path == "-") {
    musemb::write_report(std::cout, rows, header);
  } else {
    std::ofstream os(out_path);
    if (!os) throw musemb::io_error("cannot open for writing: " + out_path);
    musemb::write_report(os, rows, header);
    if (!os) throw musemb::io_error("write failed: " + out_path);
  }
  std::cerr << musemb::format_table(rows);
}

std::string member_path(const std::string& base, std::int32_t i) {
  auto dot = base.find_last_of('.');
  auto slash = base.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return base + "." + std::to_string(i);
  return base.substr(0, dot) + "." + std::to_string(i) + base.substr(dot);
}

struct TrainArgs {
  std::string data, valid, tasks, out;
  std::string loss = "warp";
  std::string alpha = "harmonic";
  std::int64_t alpha_k = 10;
  std::int32_t dim = 100;
  double C = 1.0;
  double lr = 0.01;
  std::int64_t steps = 100000;
  std::int64_t eval_every = 0;
  std::int64_t patience = 10;
  std::int32_t k_eval = 1;
  std::uint64_t seed = 42;
  std::string artist_sim;
  std::int32_t ensemble = 1;
  std::int32_t threads = 1;
  std::string report = "-";
};

void run_train(const TrainArgs& a) {
  auto tasks = parse_tasks(a.tasks);
  bool wants_sa = false;
  for (auto t : tasks) wants_sa = wants_sa || t == musemb::Task::sim_artist;
  if (wants_sa && a.artist_sim.empty())
    throw musemb::data_error("task sa requires --artist-sim");

  musemb::Dataset train_data = musemb::load_dataset(a.data);
  musemb::Dataset valid_data = musemb::load_dataset(a.valid);
  auto overlap = musemb::song_id_overlap(train_data, valid_data);
  if (!overlap.empty())
    std::cerr << "warning: " << overlap.size()
              << " song ids appear in both train and validation sets\n";

  musemb::ArtistSim sim;
  bool have_sim = !a.artist_sim.empty();
  if (have_sim) sim = musemb::load_artist_sim(a.artist_sim, train_data.n_artists);

  musemb::TrainConfig cfg;
  cfg.tasks = tasks;
  cfg.loss = musemb::parse_loss(a.loss);
  cfg.alpha = parse_alpha(a.alpha, a.alpha_k);
  cfg.d = a.dim;
  cfg.C = static_cast<float>(a.C);
  cfg.gamma = a.lr;
  cfg.max_steps = a.steps;
  cfg.eval_every = a.eval_every;
  cfg.patience = a.patience;
  cfg.seed = a.seed;
  cfg.k_eval = a.k_eval;

  std::vector<musemb::TrainReport> reports;
  if (a.ensemble == 1) {
    reports.push_back(musemb::train(train_data, valid_data, cfg, have_sim ? &sim : nullptr));
    musemb::save_model(a.out, reports[0].model);
  } else {
    reports = musemb::train_ensemble(train_data, valid_data, cfg, a.ensemble, a.threads,
                                     have_sim ? &sim : nullptr);
    for (std::int32_t i = 0; i < a.ensemble; ++i)
      musemb::save_model(member_path(a.out, i), reports[static_cast<std::size_t>(i)].model);
  }

  std::vector<std::string> header = {
      "command train",
      "data " + a.data,
      "valid " + a.valid,
      "tasks " + tasks_str(tasks),
      "loss " + std::string(musemb::loss_name(cfg.loss)),
      "alpha " + alpha_str(cfg.alpha),
      "dim " + std::to_string(cfg.d),
      "C " + musemb::detail::format_float(cfg.C),
      "lr " + musemb::detail::format_float(cfg.gamma),
      "steps " + std::to_string(cfg.max_steps),
      "eval_every " + std::to_string(cfg.eval_every),
      "patience " + std::to_string(cfg.patience),
      "k_eval " + std::to_string(cfg.k_eval),
      "seed " + std::to_string(cfg.seed),
      "artist_sim " + (have_sim ? a.artist_sim : std::string("-")),
      "ensemble " + std::to_string(a.ensemble),
      "out " + a.out,
  };
  for (std::size_t mi = 0; mi < reports.size(); ++mi) {
    const auto& r = reports[mi];
    header.push_back("member " + std::to_string(mi) + " steps_taken " +
                     std::to_string(r.steps_taken) + " best_checkpoint " +
                     std::to_string(r.best_checkpoint));
    std::cerr << "member " << mi << ": " << r.steps_taken << " steps, "
              << r.checkpoints.size() << " checkpoints, " << r.wall_seconds << "s\n";
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (a.report != "-") {
    file.open(a.report);
    if (!file) throw musemb::io_error("cannot open for writing: " + a.report);
    os = &file;
  }
  for (const auto& h : header) *os << "# " << h << '\n';
  *os << "member\tstep\ttask\tprecision\n";
  for (std::size_t mi = 0; mi < reports.size(); ++mi)
    for (const auto& cp : reports[mi].checkpoints)
      for (std::size_t ti = 0; ti < cfg.tasks.size(); ++ti)
        *os << mi << '\t' << cp.step << '\t' << musemb::task_name(cfg.tasks[ti]) << '\t'
            << musemb::detail::format_float(cp.task_precision[ti]) << '\n';
  if (a.report != "-" && !file) throw musemb::io_error("write failed: " + a.report);
}

struct EvalArgs {
  std::string models, data, tasks, out = "-";
  std::string k = "3,6,9,12,15";
  std::string artist_sim;
};

void run_eval(const EvalArgs& a, bool ensemble) {
  auto tasks = parse_tasks(a.tasks);
  auto ks = parse_ks(a.k);
  std::vector<musemb::EmbeddingModel> models;
  for (const auto& p : split_csv(a.models)) {
    if (p.empty()) continue;
    models.push_back(musemb::load_model(p));
  }
  if (models.empty()) throw musemb::data_error("no model files given");
  if (!ensemble && models.size() != 1)
    throw musemb::data_error("eval takes one model; use ensemble-eval for several");

  musemb::Dataset data = musemb::load_dataset(a.data);
  musemb::ArtistSim sim;
  bool have_sim = !a.artist_sim.empty();
  if (have_sim) sim = musemb::load_artist_sim(a.artist_sim, data.n_artists);
  bool wants_sa = false;
  for (auto t : tasks) wants_sa = wants_sa || t == musemb::Task::sim_artist;
  if (wants_sa && !have_sim) throw musemb::data_error("task sa requires --artist-sim");

  auto result = musemb::evaluate(models, data, tasks, ks, have_sim ? &sim : nullptr);
  std::vector<std::string> header = {
      std::string("command ") + (ensemble ? "ensemble-eval" : "eval"),
      std::string(ensemble ? "models " : "model ") + a.models,
      "data " + a.data,
      "tasks " + tasks_str(tasks),
      "k " + a.k,
      "artist_sim " + (have_sim ? a.artist_sim : std::string("-")),
  };
  for (const auto& te : result.tasks)
    if (te.n_skipped > 0)
      header.push_back("skipped " + std::string(musemb::task_name(te.task)) + " " +
                       std::to_string(te.n_skipped));
  emit_report(a.out, musemb::to_rows(result), header);
}

struct QueryArgs {
  std::string model, data, task;
  std::int32_t index = 0;
  std::int32_t top = 10;
};

void run_query(const QueryArgs& a) {
  musemb::EmbeddingModel model = musemb::load_model(a.model);
  musemb::Task task = musemb::parse_task(a.task);
  musemb::Dataset data = musemb::load_dataset(a.data);
  if (data.n_artists != model.n_artists() || data.n_tags != model.n_tags() ||
      data.feat_dim != model.feat_dim())
    throw musemb::data_error("query: dataset dimensions do not match the model");
  if (a.top < 1) throw musemb::data_error("query: --top must be >= 1");

  musemb::SongIndex ix;
  const musemb::SongIndex* ixp = nullptr;
  if (musemb::task_ranks_songs(task)) {
    ix = musemb::build_song_index(model, data);
    ixp = &ix;
  }

  musemb::Query q;
  std::int32_t exclude_song = -1;
  if (musemb::task_query_is_song(task)) {
    if (a.index < 0 || a.index >= static_cast<std::int32_t>(data.records.size()))
      throw musemb::data_error("query: song index out of range");
    q = musemb::Query::song(data.records[static_cast<std::size_t>(a.index)].features);
    if (task == musemb::Task::sim_song) exclude_song = a.index;
  } else {
    q = musemb::Query::artist(a.index);
  }

  auto ranked = musemb::rank_all(model, task, q, static_cast<std::size_t>(a.top), ixp,
                                 exclude_song);
  std::cout << "# command query\n# model " << a.model << "\n# data " << a.data << "\n# task "
            << musemb::task_name(task) << "\n# index " << a.index << "\n# top " << a.top << "\n";
  bool songs = musemb::task_ranks_songs(task);
  std::cout << (songs ? "rank\tid\tscore\tsong_id\n" : "rank\tid\tscore\n");
  for (std::size_t r = 0; r < ranked.items.size(); ++r) {
    std::cout << (r + 1) << '\t' << ranked.items[r].id << '\t'
              << musemb::detail::format_float(ranked.items[r].score);
    if (songs)
      std::cout << '\t' << data.records[static_cast<std::size_t>(ranked.items[r].id)].song_id;
    std::cout << '\n';
  }
}

struct SynthArgs {
  std::string preset, out_dir;
  std::int32_t songs = 0;  // 0: preset default
  std::int32_t artists = 100;
  std::int32_t tags = 50;
  std::int32_t feat_dim = 24;
  std::int32_t latent_dim = 8;
  double noise = 0.3;
  std::int32_t tags_per_song = 3;
  double tag_coverage = 1.0;
  double jitter = 0.25;
  std::int32_t sim_neighbors = 5;
  std::int32_t classes = 4;
  std::uint64_t seed = 1;
};

void run_synth(const SynthArgs& a) {
  musemb::SynthData data;
  if (a.preset == "latent") {
    musemb::SynthSpec spec;
    spec.n_songs = a.songs > 0 ? a.songs : 2000;
    spec.n_artists = a.artists;
    spec.n_tags = a.tags;
    spec.feat_dim = a.feat_dim;
    spec.latent_dim = a.latent_dim;
    spec.noise_sigma = a.noise;
    spec.seed = a.seed;
    spec.tags_per_song = a.tags_per_song;
    spec.tag_coverage = a.tag_coverage;
    spec.artist_jitter = a.jitter;
    spec.sim_neighbors = a.sim_neighbors;
    data = musemb::gen_latent(spec);
  } else if (a.preset == "separable") {
    data = musemb::gen_separable(a.songs > 0 ? a.songs : 20, a.classes);
  } else {
    throw musemb::data_error("unknown preset: " + a.preset + " (latent|separable)");
  }

  std::filesystem::create_directories(a.out_dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(a.out_dir) / name).string();
  };
  musemb::save_dataset(path("train.tsv"), data.train);
  musemb::save_dataset(path("valid.tsv"), data.valid);
  musemb::save_dataset(path("test.tsv"), data.test);
  bool any_sim = false;
  for (const auto& ns : data.sim.neighbors) any_sim = any_sim || !ns.empty();
  if (any_sim) musemb::save_artist_sim(path("artist_sim.tsv"), data.sim);
  std::cerr << "wrote " << data.train.records.size() << " train, "
            << data.valid.records.size() << " valid, " << data.test.records.size()
            << " test songs to " << a.out_dir << (any_sim ? " (+artist_sim.tsv)" : "") << "\n";
}

struct FitArgs {
  std::vector<std::string> frame_files;
  std::int32_t codewords = 2000;
  std::int32_t iters = 20;
  std::uint64_t seed = 42;
  std::string out;
};

void run_featurize_fit(const FitArgs& a) {
  musemb::FrameMatrix pool;
  bool first = true;
  for (const auto& p : a.frame_files) {
    musemb::FrameMatrix f = musemb::load_frames(p);
    if (first) {
      pool = std::move(f);
      first = false;
    } else {
      pool.append(f);
    }
  }
  auto result = musemb::kmeans_fit(pool, a.codewords, a.iters, a.seed);
  musemb::save_codebook(a.out, result.codebook);
  std::cerr << "fit " << a.codewords << " codewords on " << pool.n_frames << " frames, "
            << result.inertia.size() << " iterations, final inertia "
            << (result.inertia.empty() ? 0.0 : result.inertia.back()) << "\n";
}

struct EncodeArgs {
  std::vector<std::string> frame_files;
  std::string codebook;
  std::string out = "-";
};

void run_featurize_encode(const EncodeArgs& a) {
  musemb::Codebook cb = musemb::load_codebook(a.codebook);
  musemb::Dataset out;
  out.n_artists = 0;
  out.n_tags = 0;
  out.feat_dim = cb.n_codes;
  for (const auto& p : a.frame_files) {
    musemb::SongRecord rec;
    rec.song_id = std::filesystem::path(p).stem().string();
    rec.features = musemb::encode_counts(cb, musemb::load_frames(p));
    out.records.push_back(std::move(rec));
  }
  if (a.out == "-") {
    musemb::write_dataset(std::cout, out);
  } else {
    musemb::save_dataset(a.out, out);
  }
  std::cerr << "encoded " << out.records.size() << " songs over " << cb.n_codes
            << " codewords\n";
}

struct OvrTrainArgs {
  std::string data, out;
  std::string labels = "tag";
  std::int32_t epochs = 50;
  double lr = 1.0;
  std::uint64_t seed = 42;
};

void run_ovr_train(const OvrTrainArgs& a) {
  musemb::Dataset data = musemb::load_dataset(a.data);
  musemb::Rng rng(a.seed);
  auto model =
      musemb::ovr_train(data, musemb::parse_label_kind(a.labels), a.epochs, a.lr, rng);
  musemb::save_ovr(a.out, model);
  std::cerr << "trained " << model.n_labels << " one-vs-rest classifiers, hinge loss "
            << musemb::ovr_hinge_loss(model, data) << "\n";
}

struct OvrEvalArgs {
  std::string model, data, out = "-";
  std::string labels = "tag";
  std::string k = "3,6,9,12,15";
};

void run_ovr_eval(const OvrEvalArgs& a) {
  auto kind = musemb::parse_label_kind(a.labels);
  musemb::OvrModel model = musemb::load_ovr(a.model, kind);
  musemb::Dataset data = musemb::load_dataset(a.data);
  auto ks = parse_ks(a.k);
  auto result = musemb::evaluate_ovr(model, data, ks);
  auto rows = musemb::to_rows(result);
  for (auto& r : rows) r.task = "ovr-" + r.task;
  std::vector<std::string> header = {
      "command ovr-eval", "model " + a.model, "data " + a.data,
      "labels " + std::string(musemb::label_kind_name(kind)), "k " + a.k,
  };
  for (const auto& te : result.tasks)
    if (te.n_skipped > 0) header.push_back("skipped " + std::to_string(te.n_skipped));
  emit_report(a.out, rows, header);
}

struct CosineArgs {
  std::string data, out = "-";
  std::string k = "3,6,9,12,15";
};

void run_cosine_eval(const CosineArgs& a) {
  musemb::Dataset data = musemb::load_dataset(a.data);
  auto ks = parse_ks(a.k);
  auto result = musemb::evaluate_cosine(data, ks);
  auto rows = musemb::to_rows(result);
  for (auto& r : rows) r.task = "cosine";
  std::vector<std::string> header = {
      "command cosine-eval", "data " + a.data, "k " + a.k,
  };
  for (const auto& te : result.tasks)
    if (te.n_skipped > 0) header.push_back("skipped " + std::to_string(te.n_skipped));
  emit_report(a.out, rows, header);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint song/artist/tag embeddings for music annotation and retrieval"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train an embedding model");
  train_cmd->add_option("--data", train_args.data, "training dataset TSV")->required();
  train_cmd->add_option("--valid", train_args.valid, "validation dataset TSV")->required();
  train_cmd->add_option("--tasks", train_args.tasks, "comma list of ap,sp,sa,ss,tp")->required();
  train_cmd->add_option("--out", train_args.out, "output model path")->required();
  train_cmd->add_option("--loss", train_args.loss, "warp|auc (default warp)");
  train_cmd->add_option("--alpha", train_args.alpha, "uniform|harmonic|patk (default harmonic)");
  train_cmd->add_option("--alpha-k", train_args.alpha_k, "k for the patk alpha scheme");
  train_cmd->add_option("--dim", train_args.dim, "embedding dimension (default 100)");
  train_cmd->add_option("--C", train_args.C, "column norm bound (default 1.0)");
  train_cmd->add_option("--lr", train_args.lr, "learning rate (default 0.01)");
  train_cmd->add_option("--steps", train_args.steps, "max SGD steps");
  train_cmd->add_option("--eval-every", train_args.eval_every,
                        "steps between validation checks (0: 10x train size)");
  train_cmd->add_option("--patience", train_args.patience,
                        "non-improving checks before stopping");
  train_cmd->add_option("--k-eval", train_args.k_eval, "k for validation precision@k");
  train_cmd->add_option("--seed", train_args.seed, "RNG seed");
  train_cmd->add_option("--artist-sim", train_args.artist_sim,
                        "artist similarity TSV (required for task sa)");
  train_cmd->add_option("--ensemble", train_args.ensemble, "number of ensemble members");
  train_cmd->add_option("--threads", train_args.threads, "worker cap for ensemble training");
  train_cmd->add_option("--report", train_args.report, "checkpoint report path (- = stdout)");
  train_cmd->callback([&] { run_train(train_args); });

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a test set");
  eval_cmd->add_option("--model", eval_args.models, "model file")->required();
  eval_cmd->add_option("--data", eval_args.data, "test dataset TSV")->required();
  eval_cmd->add_option("--tasks", eval_args.tasks, "comma list of ap,sp,sa,ss,tp")->required();
  eval_cmd->add_option("--k", eval_args.k, "comma list of cutoffs (default 3,6,9,12,15)");
  eval_cmd->add_option("--artist-sim", eval_args.artist_sim, "artist similarity TSV for sa");
  eval_cmd->add_option("--out", eval_args.out, "report path (- = stdout)");
  eval_cmd->callback([&] { run_eval(eval_args, false); });

  EvalArgs ens_args;
  auto* ens_cmd = app.add_subcommand("ensemble-eval", "evaluate a model ensemble (score sum)");
  ens_cmd->add_option("--models", ens_args.models, "comma list of model files")->required();
  ens_cmd->add_option("--data", ens_args.data, "test dataset TSV")->required();
  ens_cmd->add_option("--tasks", ens_args.tasks, "comma list of ap,sp,sa,ss,tp")->required();
  ens_cmd->add_option("--k", ens_args.k, "comma list of cutoffs");
  ens_cmd->add_option("--artist-sim", ens_args.artist_sim, "artist similarity TSV for sa");
  ens_cmd->add_option("--out", ens_args.out, "report path (- = stdout)");
  ens_cmd->callback([&] { run_eval(ens_args, true); });

  QueryArgs query_args;
  auto* query_cmd = app.add_subcommand("query", "rank labels for one query");
  query_cmd->add_option("--model", query_args.model, "model file")->required();
  query_cmd->add_option("--data", query_args.data, "dataset TSV")->required();
  query_cmd->add_option("--task", query_args.task, "ap|sp|sa|ss|tp")->required();
  query_cmd->add_option("--index", query_args.index,
                        "song row index (ap,tp,ss) or artist id (sp,sa)")->required();
  query_cmd->add_option("--top", query_args.top, "list length (default 10)");
  query_cmd->callback([&] { run_query(query_args); });

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--preset", synth_args.preset, "latent|separable")->required();
  synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth_cmd->add_option("--songs", synth_args.songs, "song count (0: preset default)");
  synth_cmd->add_option("--artists", synth_args.artists, "artist count (latent)");
  synth_cmd->add_option("--tags", synth_args.tags, "tag count (latent)");
  synth_cmd->add_option("--feat-dim", synth_args.feat_dim, "feature dimension (latent)");
  synth_cmd->add_option("--latent-dim", synth_args.latent_dim, "latent dimension (latent)");
  synth_cmd->add_option("--noise", synth_args.noise, "feature noise sigma (latent)");
  synth_cmd->add_option("--tags-per-song", synth_args.tags_per_song, "tags per song (latent)");
  synth_cmd->add_option("--tag-coverage", synth_args.tag_coverage,
                        "share of train songs keeping tags (latent)");
  synth_cmd->add_option("--jitter", synth_args.jitter, "song-vs-artist latent jitter (latent)");
  synth_cmd->add_option("--sim-neighbors", synth_args.sim_neighbors,
                        "ground-truth similar artists per artist (latent)");
  synth_cmd->add_option("--classes", synth_args.classes, "class count (separable)");
  synth_cmd->add_option("--seed", synth_args.seed, "RNG seed");
  synth_cmd->callback([&] { run_synth(synth_args); });

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("featurize-fit", "fit a codeword dictionary on frames");
  fit_cmd->add_option("frames", fit_args.frame_files, "frame files")->required()->expected(-1);
  fit_cmd->add_option("--codewords", fit_args.codewords, "dictionary size (default 2000)");
  fit_cmd->add_option("--iters", fit_args.iters, "k-means iterations (default 20)");
  fit_cmd->add_option("--seed", fit_args.seed, "RNG seed");
  fit_cmd->add_option("--out", fit_args.out, "output codebook path")->required();
  fit_cmd->callback([&] { run_featurize_fit(fit_args); });

  EncodeArgs enc_args;
  auto* enc_cmd =
      app.add_subcommand("featurize-encode", "encode songs as codeword count vectors");
  enc_cmd->add_option("frames", enc_args.frame_files, "per-song frame files")
      ->required()
      ->expected(-1);
  enc_cmd->add_option("--codebook", enc_args.codebook, "codebook file")->required();
  enc_cmd->add_option("--out", enc_args.out, "output dataset TSV (- = stdout)");
  enc_cmd->callback([&] { run_featurize_encode(enc_args); });

  OvrTrainArgs ovrt_args;
  auto* ovrt_cmd = app.add_subcommand("ovr-train", "train the one-vs-rest baseline");
  ovrt_cmd->add_option("--data", ovrt_args.data, "training dataset TSV")->required();
  ovrt_cmd->add_option("--labels", ovrt_args.labels, "tag|artist (default tag)");
  ovrt_cmd->add_option("--epochs", ovrt_args.epochs, "training passes (default 50)");
  ovrt_cmd->add_option("--lr", ovrt_args.lr, "perceptron step size (default 1.0)");
  ovrt_cmd->add_option("--seed", ovrt_args.seed, "RNG seed (example shuffling)");
  ovrt_cmd->add_option("--out", ovrt_args.out, "output model path")->required();
  ovrt_cmd->callback([&] { run_ovr_train(ovrt_args); });

  OvrEvalArgs ovre_args;
  auto* ovre_cmd = app.add_subcommand("ovr-eval", "evaluate the one-vs-rest baseline");
  ovre_cmd->add_option("--model", ovre_args.model, "ovr model file")->required();
  ovre_cmd->add_option("--data", ovre_args.data, "test dataset TSV")->required();
  ovre_cmd->add_option("--labels", ovre_args.labels, "tag|artist (default tag)");
  ovre_cmd->add_option("--k", ovre_args.k, "comma list of cutoffs");
  ovre_cmd->add_option("--out", ovre_args.out, "report path (- = stdout)");
  ovre_cmd->callback([&] { run_ovr_eval(ovre_args); });

  CosineArgs cos_args;
  auto* cos_cmd =
      app.add_subcommand("cosine-eval", "cosine-similarity song retrieval baseline");
  cos_cmd->add_option("--data", cos_args.data, "test dataset TSV")->required();
  cos_cmd->add_option("--k", cos_args.k, "comma list of cutoffs");
  cos_cmd->add_option("--out", cos_args.out, "report path (- = stdout)");
  cos_cmd->callback([&] { run_cosine_eval(cos_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const musemb::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const musemb::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
