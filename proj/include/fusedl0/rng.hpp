#pragma once

#include <cmath>
#include <cstdint>

namespace fusedl0 {

// SplitMix64: the output is a fixed hash of (seed, draw counter), so streams
// are reproducible from a single 64-bit seed across platforms. Gaussians come
// from Box-Muller on two uniform draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // derive an independent stream for a named purpose
  SplitMix64 fork(std::uint64_t stream) {
    return SplitMix64(next_u64() ^ (0x632be59bd9b4e019ull * (stream + 1)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace fusedl0
