#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "musemb/errors.hpp"
#include "musemb/sparse_vector.hpp"

namespace musemb {

// One song: its id, attributed artist and tag sets, and audio features.
// Artist or tag sets may be empty (cold-start songs carry features only).
struct SongRecord {
  std::string song_id;
  std::vector<std::int32_t> artists;  // sorted, duplicate-free
  std::vector<std::int32_t> tags;     // sorted, duplicate-free
  SparseVector features;

  bool operator==(const SongRecord&) const = default;
};

struct Dataset {
  std::vector<SongRecord> records;
  std::int32_t n_artists = 0;
  std::int32_t n_tags = 0;
  std::int32_t feat_dim = 0;

  bool operator==(const Dataset&) const = default;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::int32_t parse_i32(std::string_view tok, long line_no, const char* what) {
  std::int32_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                     std::string(tok) + "'");
  return v;
}

inline float parse_f32(std::string_view tok, long line_no, const char* what) {
  float v = 0.0f;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                     std::string(tok) + "'");
  return v;
}

// comma-separated ids, bounds-checked against n; empty field means empty set
inline std::vector<std::int32_t> parse_id_csv(std::string_view field, std::int32_t n,
                                              long line_no, const char* what) {
  std::vector<std::int32_t> ids;
  if (field.empty()) return ids;
  for (std::string_view tok : split(field, ',')) {
    std::int32_t id = parse_i32(tok, line_no, what);
    if (id < 0 || id >= n)
      throw data_error("line " + std::to_string(line_no) + ": " + what + " id " +
                       std::to_string(id) + " out of range [0, " + std::to_string(n) + ")");
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

inline SparseVector parse_features(std::string_view field, std::int32_t dim, long line_no) {
  std::vector<std::pair<std::int32_t, float>> entries;
  if (!field.empty()) {
    for (std::string_view tok : split(field, ' ')) {
      if (tok.empty())
        throw data_error("line " + std::to_string(line_no) + ": empty feature token");
      std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw data_error("line " + std::to_string(line_no) + ": feature token '" +
                         std::string(tok) + "' lacks ':'");
      entries.emplace_back(parse_i32(tok.substr(0, colon), line_no, "feature index"),
                           parse_f32(tok.substr(colon + 1), line_no, "feature value"));
    }
  }
  try {
    return SparseVector::from_entries(dim, std::move(entries));
  } catch (const data_error& e) {
    throw data_error("line " + std::to_string(line_no) + ": " + e.what());
  }
}

inline void format_float(std::string& out, float v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, p);
}

inline std::string format_float(float v) {
  std::string s;
  format_float(s, v);
  return s;
}

inline std::string format_float(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace detail

// Dataset text format, one song per line:
//   header  "#dims\t<n_artists>\t<n_tags>\t<feat_dim>"
//   record  "song_id\tartist_ids_csv\ttag_ids_csv\tidx:val idx:val ..."
// Empty csv and feature fields are allowed. Line numbers are 1-based and
// include the header.
inline Dataset parse_dataset(std::istream& is) {
  Dataset ds;
  std::string line;
  long line_no = 0;

  if (!std::getline(is, line)) throw data_error("empty dataset: missing #dims header");
  ++line_no;
  {
    auto fields = detail::split(line, '\t');
    if (fields.size() != 4 || fields[0] != "#dims")
      throw data_error("line 1: expected header '#dims\\t<|A|>\\t<|T|>\\t<|S|>'");
    ds.n_artists = detail::parse_i32(fields[1], line_no, "artist count");
    ds.n_tags = detail::parse_i32(fields[2], line_no, "tag count");
    ds.feat_dim = detail::parse_i32(fields[3], line_no, "feature dim");
    if (ds.n_artists < 0 || ds.n_tags < 0)
      throw data_error("line 1: negative dictionary size");
    if (ds.feat_dim <= 0) throw data_error("line 1: feature dim must be positive");
  }

  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 4)
      throw data_error("line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    SongRecord rec;
    rec.song_id = std::string(fields[0]);
    if (rec.song_id.empty())
      throw data_error("line " + std::to_string(line_no) + ": empty song id");
    rec.artists = detail::parse_id_csv(fields[1], ds.n_artists, line_no, "artist");
    rec.tags = detail::parse_id_csv(fields[2], ds.n_tags, line_no, "tag");
    rec.features = detail::parse_features(fields[3], ds.feat_dim, line_no);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open dataset: " + path);
  return parse_dataset(is);
}

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  os << "#dims\t" << ds.n_artists << '\t' << ds.n_tags << '\t' << ds.feat_dim << '\n';
  std::string line;
  for (const SongRecord& rec : ds.records) {
    line.clear();
    line += rec.song_id;
    line += '\t';
    for (std::size_t i = 0; i < rec.artists.size(); ++i) {
      if (i) line += ',';
      line += std::to_string(rec.artists[i]);
    }
    line += '\t';
    for (std::size_t i = 0; i < rec.tags.size(); ++i) {
      if (i) line += ',';
      line += std::to_string(rec.tags[i]);
    }
    line += '\t';
    for (std::size_t i = 0; i < rec.features.nnz(); ++i) {
      if (i) line += ' ';
      line += std::to_string(rec.features.idx[i]);
      line += ':';
      detail::format_float(line, rec.features.val[i]);
    }
    line += '\n';
    os << line;
  }
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  write_dataset(os, ds);
  if (!os) throw io_error("write failed: " + path);
}

// Returns song ids present in both datasets (train/test leakage check).
inline std::vector<std::string> song_id_overlap(const Dataset& a, const Dataset& b) {
  std::set<std::string> ids;
  for (const auto& r : a.records) ids.insert(r.song_id);
  std::vector<std::string> out;
  for (const auto& r : b.records)
    if (ids.count(r.song_id)) out.push_back(r.song_id);
  return out;
}

}  // namespace musemb
