#pragma once

#include <cstdint>

namespace musemb::opcount {

// Thread-local multiply-add counter fed by the scoring kernels.
// Used by tests to verify the advertised cost of ranking a query.
inline thread_local std::uint64_t madds = 0;

inline void add(std::uint64_t n) { madds += n; }
inline std::uint64_t read() { return madds; }
inline void reset() { madds = 0; }

}  // namespace musemb::opcount
