#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "musemb/errors.hpp"

namespace musemb::io {

// All binary formats are little-endian on disk.

inline void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                        static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

inline void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline std::uint32_t read_u32(std::istream& is, const std::string& what) {
  std::array<unsigned char, 4> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), 4))
    throw io_error("truncated file while reading " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& is, const std::string& what) {
  std::uint32_t bits = read_u32(is, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what) {
  char b[4];
  if (!is.read(b, 4)) throw io_error("truncated file while reading " + what + " magic");
  if (std::memcmp(b, magic, 4) != 0)
    throw io_error("bad magic for " + what + " (expected " + std::string(magic, 4) + ")");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open for reading: " + path);
  return is;
}

}  // namespace musemb::io
