#pragma once

#include <cmath>
#include <cstdint>

// Counter-based pseudo-random streams: every Monte Carlo replication derives
// its own generator from (master seed, replication index), so results do not
// depend on execution order or thread count.
namespace emerge::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Unit-mean exponential via inversion.
  double exponential() { return -std::log1p(-uniform01()); }

  // Uniform index in [0, n) without modulo bias.
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

inline SplitMix64 replication_stream(std::uint64_t master_seed,
                                     std::uint64_t replication) {
  std::uint64_t s = mix64(master_seed ^ 0x6a5d39eae116586aULL);
  return SplitMix64(mix64(s ^ mix64(replication ^ 0x9f5300cb01d3d95bULL)));
}

}  // namespace emerge::rng
