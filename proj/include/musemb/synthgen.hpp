#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "musemb/artist_sim.hpp"
#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/rng.hpp"

namespace musemb {

struct SynthSpec {
  std::int32_t n_songs = 2000;
  std::int32_t n_artists = 100;
  std::int32_t n_tags = 50;
  std::int32_t feat_dim = 24;
  std::int32_t latent_dim = 8;
  double noise_sigma = 0.3;
  std::uint64_t seed = 1;
  std::int32_t tags_per_song = 3;
  double tag_coverage = 1.0;  // share of train songs keeping their tags
  double artist_jitter = 0.25;
  std::int32_t sim_neighbors = 5;
};

// Generated splits plus the generating world (latent positions and the
// mixing map), so tests can construct a provably optimal model when
// noise_sigma is 0.
struct SynthData {
  Dataset train, valid, test;
  ArtistSim sim;
  std::int32_t latent_dim = 0;
  std::vector<double> artist_lat;  // n_artists x latent_dim, row-major
  std::vector<double> tag_lat;     // n_tags x latent_dim
  std::vector<double> mix;         // feat_dim x latent_dim, orthonormal columns
};

namespace detail {

inline void fill_unit_rows(std::vector<double>& m, std::int32_t rows, std::int32_t dim,
                           Rng& rng) {
  m.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim), 0.0);
  for (std::int32_t r = 0; r < rows; ++r) {
    double* row = m.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(dim);
    double n2 = 0.0;
    for (std::int32_t c = 0; c < dim; ++c) {
      row[c] = rng.gaussian(0.0, 1.0);
      n2 += row[c] * row[c];
    }
    if (n2 == 0.0) {
      row[0] = 1.0;
      n2 = 1.0;
    }
    double inv = 1.0 / std::sqrt(n2);
    for (std::int32_t c = 0; c < dim; ++c) row[c] *= inv;
  }
}

// Gram-Schmidt over columns: rows x cols with orthonormal columns.
inline std::vector<double> orthonormal_columns(std::int32_t rows, std::int32_t cols, Rng& rng) {
  std::vector<double> m(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (double& v : m) v = rng.gaussian(0.0, 1.0);
  auto at = [&](std::int32_t r, std::int32_t c) -> double& {
    return m[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(c)];
  };
  for (std::int32_t c = 0; c < cols; ++c) {
    for (std::int32_t p = 0; p < c; ++p) {
      double proj = 0.0;
      for (std::int32_t r = 0; r < rows; ++r) proj += at(r, c) * at(r, p);
      for (std::int32_t r = 0; r < rows; ++r) at(r, c) -= proj * at(r, p);
    }
    double n2 = 0.0;
    for (std::int32_t r = 0; r < rows; ++r) n2 += at(r, c) * at(r, c);
    if (n2 < 1e-12) throw data_error("synth: degenerate mixing matrix, retry with another seed");
    double inv = 1.0 / std::sqrt(n2);
    for (std::int32_t r = 0; r < rows; ++r) at(r, c) *= inv;
  }
  return m;
}

inline std::string synth_song_id(std::int32_t i) {
  std::string num = std::to_string(i);
  return "s" + std::string(6 - std::min<std::size_t>(6, num.size()), '0') + num;
}

}  // namespace detail

// Shared-latent generator: artists and tags live in one latent space, each
// song sits near its artist, carries the nearest tags, and its features are
// a noisy orthonormal image of its latent position. All five tasks are
// correlated by construction. Splits are song-disjoint, 60/20/20.
inline SynthData gen_latent(const SynthSpec& spec) {
  if (spec.n_songs < 5 || spec.n_artists < 1 || spec.n_tags < 1 || spec.feat_dim < 1)
    throw data_error("synth: infeasible spec (need >= 5 songs and positive dims)");
  if (spec.latent_dim < 1 || spec.latent_dim > spec.feat_dim)
    throw data_error("synth: latent_dim must be in [1, feat_dim]");
  if (spec.noise_sigma < 0.0) throw data_error("synth: noise_sigma must be >= 0");
  if (spec.tags_per_song < 1 || spec.tags_per_song > spec.n_tags)
    throw data_error("synth: tags_per_song must be in [1, n_tags]");
  if (spec.tag_coverage < 0.0 || spec.tag_coverage > 1.0)
    throw data_error("synth: tag_coverage must be in [0, 1]");

  Rng rng(spec.seed);
  SynthData out;
  out.latent_dim = spec.latent_dim;
  detail::fill_unit_rows(out.artist_lat, spec.n_artists, spec.latent_dim, rng);
  detail::fill_unit_rows(out.tag_lat, spec.n_tags, spec.latent_dim, rng);
  out.mix = detail::orthonormal_columns(spec.feat_dim, spec.latent_dim, rng);

  for (Dataset* d : {&out.train, &out.valid, &out.test}) {
    d->n_artists = spec.n_artists;
    d->n_tags = spec.n_tags;
    d->feat_dim = spec.feat_dim;
  }

  std::vector<double> z(static_cast<std::size_t>(spec.latent_dim));
  std::vector<std::pair<double, std::int32_t>> tag_rank;
  for (std::int32_t i = 0; i < spec.n_songs; ++i) {
    std::int32_t a = static_cast<std::int32_t>(rng.bounded(spec.n_artists));
    const double* alat =
        out.artist_lat.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(spec.latent_dim);
    for (std::int32_t c = 0; c < spec.latent_dim; ++c)
      z[static_cast<std::size_t>(c)] = alat[c] + rng.gaussian(0.0, spec.artist_jitter);

    tag_rank.clear();
    for (std::int32_t t = 0; t < spec.n_tags; ++t) {
      const double* tlat =
          out.tag_lat.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(spec.latent_dim);
      double s = 0.0;
      for (std::int32_t c = 0; c < spec.latent_dim; ++c) s += z[static_cast<std::size_t>(c)] * tlat[c];
      tag_rank.emplace_back(-s, t);  // sort ascending = score descending, ties to low id
    }
    std::sort(tag_rank.begin(), tag_rank.end());
    std::vector<std::int32_t> tags;
    for (std::int32_t t = 0; t < spec.tags_per_song; ++t)
      tags.push_back(tag_rank[static_cast<std::size_t>(t)].second);
    std::sort(tags.begin(), tags.end());

    std::vector<std::pair<std::int32_t, float>> feats;
    for (std::int32_t r = 0; r < spec.feat_dim; ++r) {
      double x = 0.0;
      const double* mrow =
          out.mix.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(spec.latent_dim);
      for (std::int32_t c = 0; c < spec.latent_dim; ++c)
        x += mrow[c] * z[static_cast<std::size_t>(c)];
      if (spec.noise_sigma > 0.0) x += rng.gaussian(0.0, spec.noise_sigma);
      if (x != 0.0) feats.emplace_back(r, static_cast<float>(x));
    }

    SongRecord rec;
    rec.song_id = detail::synth_song_id(i);
    rec.artists = {a};
    rec.tags = std::move(tags);
    rec.features = SparseVector::from_entries(spec.feat_dim, feats);
    switch (i % 5) {
      case 3: out.valid.records.push_back(std::move(rec)); break;
      case 4: out.test.records.push_back(std::move(rec)); break;
      default: out.train.records.push_back(std::move(rec));
    }
  }

  // Untag a share of train songs; valid and test stay fully labelled. A
  // separate stream keeps the rest of the world byte-identical across
  // coverage settings.
  if (spec.tag_coverage < 1.0) {
    Rng cov(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    auto& recs = out.train.records;
    std::vector<std::size_t> ord(recs.size());
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    for (std::size_t i = recs.size(); i > 1; --i)
      std::swap(ord[i - 1], ord[static_cast<std::size_t>(cov.bounded(static_cast<std::int64_t>(i)))]);
    auto keep = static_cast<std::size_t>(
        std::llround(spec.tag_coverage * static_cast<double>(recs.size())));
    for (std::size_t i = keep; i < ord.size(); ++i) recs[ord[i]].tags.clear();
  }

  // ground-truth artist neighborhoods: nearest latents
  out.sim.neighbors.assign(static_cast<std::size_t>(spec.n_artists), {});
  std::int32_t n_nb = std::min(spec.sim_neighbors, spec.n_artists - 1);
  if (n_nb > 0) {
    std::vector<std::pair<double, std::int32_t>> order;
    for (std::int32_t a = 0; a < spec.n_artists; ++a) {
      const double* alat =
          out.artist_lat.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(spec.latent_dim);
      order.clear();
      for (std::int32_t b = 0; b < spec.n_artists; ++b) {
        if (b == a) continue;
        const double* blat =
            out.artist_lat.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(spec.latent_dim);
        double s = 0.0;
        for (std::int32_t c = 0; c < spec.latent_dim; ++c) s += alat[c] * blat[c];
        order.emplace_back(-s, b);
      }
      std::sort(order.begin(), order.end());
      std::vector<std::int32_t> ns;
      for (std::int32_t t = 0; t < n_nb; ++t)
        ns.push_back(order[static_cast<std::size_t>(t)].second);
      std::sort(ns.begin(), ns.end());
      out.sim.neighbors[static_cast<std::size_t>(a)] = std::move(ns);
    }
  }
  return out;
}

// Noise-free one-hot world: class c songs have feature e_c, artist c, tag c.
// A perfect ranking exists trivially; used for exact-convergence tests.
// Songs are balanced over classes and splits, so every class appears in
// every split (requires n_songs >= 5 * n_classes).
inline SynthData gen_separable(std::int32_t n_songs, std::int32_t n_classes) {
  if (n_classes < 2) throw data_error("synth: separable preset needs >= 2 classes");
  if (n_songs < 5 * n_classes)
    throw data_error("synth: separable preset needs n_songs >= 5 * n_classes");

  SynthData out;
  out.latent_dim = n_classes;
  for (Dataset* d : {&out.train, &out.valid, &out.test}) {
    d->n_artists = n_classes;
    d->n_tags = n_classes;
    d->feat_dim = n_classes;
  }
  std::vector<std::int32_t> seen(static_cast<std::size_t>(n_classes), 0);
  for (std::int32_t i = 0; i < n_songs; ++i) {
    std::int32_t c = i % n_classes;
    SongRecord rec;
    rec.song_id = detail::synth_song_id(i);
    rec.artists = {c};
    rec.tags = {c};
    rec.features = SparseVector::from_entries(n_classes, {{c, 1.0f}});
    std::int32_t occ = seen[static_cast<std::size_t>(c)]++;
    switch (occ % 5) {
      case 3: out.valid.records.push_back(std::move(rec)); break;
      case 4: out.test.records.push_back(std::move(rec)); break;
      default: out.train.records.push_back(std::move(rec));
    }
  }
  out.sim.neighbors.assign(static_cast<std::size_t>(n_classes), {});
  return out;
}

}  // namespace musemb
