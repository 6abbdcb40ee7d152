#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixprod {

enum class ErrorCode {
  invalid_argument,    // caller broke a precondition (shape, range, missing data)
  invalid_bandwidth,   // bandwidth not finite and positive
  degenerate_column,   // a variable carries no usable spread
  degenerate_spectrum, // all singular values are zero
  sample_too_small,    // not enough rows for the requested statistic
  invalid_config,      // bad configuration value, rejected before any computation
  empty_cluster,       // an operation received a cluster with no points
  dataset_too_large,   // exceeds the exact-solver size guard
  io_error,            // file could not be read or written
  parse_error,         // malformed input file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// splitmix64 step; used to derive independent child seeds from a base seed
// so that nested randomized procedures stay reproducible.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over a sorted index list; stable identity for a cluster membership.
inline std::uint64_t hash_indices(const std::vector<int>& sorted_indices) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int v : sorted_indices) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Median with the even-length convention "mean of the two central values".
// Reorders the buffer.
double median_in_place(std::vector<double>& values);

}  // namespace mixprod
