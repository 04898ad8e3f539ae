#pragma once

#include <stdexcept>
#include <string>

namespace musemb {

// File-system level failures: missing files, short reads, bad magic.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violations of data invariants: malformed lines, out-of-range ids,
// dimension mismatches. Parse errors carry the offending line number
// in the message.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace musemb
