#include "spurlab/rng.hpp"

#include <cmath>

namespace spurlab {
namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

std::uint64_t CounterRng::next_u64() {
  return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double CounterRng::uniform() {
  // 53 random bits, shifted into (0, 1].
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

double CounterRng::sign() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

}  // namespace spurlab
