#pragma once

#include <cstdint>

namespace spurlab {

// Counter-based 64-bit generator: output i is splitmix64(key, i), so a stream
// is a pure function of (seed, stream, index). Distinct streams derived from
// the same seed are independent for all practical purposes, which is what the
// samplers rely on when fanning out batches. The uniform sequence is
// bit-exact across platforms; normals additionally go through exp/log/sqrt
// from libm.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on (0, 1] (never 0, so it is safe inside log).
  double uniform();

  // Standard normal via Box-Muller; pairs are cached.
  double normal();

  // Uniform +/-1.
  double sign();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spurlab
