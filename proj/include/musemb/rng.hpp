#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace musemb {

// Seeded generator with self-contained samplers so that identical seeds
// give identical streams independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform integer in [0, n)
  std::int64_t bounded(std::int64_t n) {
    assert(n > 0);
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // uniform double in [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; consumes two uniforms per sample
  double gaussian(double mean, double stddev) {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace musemb
