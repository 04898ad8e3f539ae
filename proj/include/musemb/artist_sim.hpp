#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"

namespace musemb {

// Ground-truth artist neighborhoods: per artist, a sorted list of similar
// artist ids (self stripped). Used as training positives and eval relevance
// for the similar-artist task.
struct ArtistSim {
  std::vector<std::vector<std::int32_t>> neighbors;

  std::int32_t n_artists() const { return static_cast<std::int32_t>(neighbors.size()); }
};

// TSV, one artist per line: artist_id TAB comma-separated similar ids.
// Artists without a line have no neighbors.
inline ArtistSim parse_artist_sim(std::istream& in, std::int32_t n_artists) {
  ArtistSim sim;
  sim.neighbors.assign(static_cast<std::size_t>(n_artists), {});
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 2)
      throw data_error("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                       std::to_string(fields.size()));
    std::int32_t a = detail::parse_i32(fields[0], line_no, "artist id");
    if (a < 0 || a >= n_artists)
      throw data_error("line " + std::to_string(line_no) + ": artist id " + std::to_string(a) +
                       " out of range [0, " + std::to_string(n_artists) + ")");
    auto ids = detail::parse_id_csv(fields[1], n_artists, line_no, "similar artist");
    std::erase(ids, a);
    sim.neighbors[static_cast<std::size_t>(a)] = std::move(ids);
  }
  return sim;
}

inline ArtistSim load_artist_sim(const std::string& path, std::int32_t n_artists) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open artist-sim file: " + path);
  return parse_artist_sim(in, n_artists);
}

inline void write_artist_sim(std::ostream& out, const ArtistSim& sim) {
  for (std::int32_t a = 0; a < sim.n_artists(); ++a) {
    const auto& ns = sim.neighbors[static_cast<std::size_t>(a)];
    if (ns.empty()) continue;
    out << a << '\t';
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (i) out << ',';
      out << ns[i];
    }
    out << '\n';
  }
}

inline void save_artist_sim(const std::string& path, const ArtistSim& sim) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_artist_sim(out, sim);
  if (!out) throw io_error("write failed: " + path);
}

// Songs grouped by artist and, per song, the other songs sharing at least
// one artist. Shared by the trainer (positives) and the evaluator
// (relevance) for the song-prediction and similar-song tasks.
struct CorpusIndex {
  std::vector<std::vector<std::int32_t>> songs_by_artist;
  std::vector<std::vector<std::int32_t>> same_artist_others;
};

inline CorpusIndex build_corpus_index(const Dataset& data) {
  CorpusIndex ix;
  ix.songs_by_artist.assign(static_cast<std::size_t>(data.n_artists), {});
  for (std::size_t i = 0; i < data.records.size(); ++i)
    for (std::int32_t a : data.records[i].artists)
      ix.songs_by_artist[static_cast<std::size_t>(a)].push_back(static_cast<std::int32_t>(i));

  ix.same_artist_others.assign(data.records.size(), {});
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    std::vector<std::int32_t> others;
    for (std::int32_t a : data.records[i].artists) {
      const auto& sa = ix.songs_by_artist[static_cast<std::size_t>(a)];
      others.insert(others.end(), sa.begin(), sa.end());
    }
    std::sort(others.begin(), others.end());
    others.erase(std::unique(others.begin(), others.end()), others.end());
    std::erase(others, static_cast<std::int32_t>(i));
    ix.same_artist_others[i] = std::move(others);
  }
  return ix;
}

}  // namespace musemb
