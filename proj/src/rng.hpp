#pragma once
#include <cstdint>

namespace stairway {

// SplitMix64 step (Steele/Lea/Flood).  This is the documented mixing function
// used everywhere randomness is derived: per-shot seeds are
// seed_shot = mix64(master_seed ^ mix64(shot_index)), so a batch can be split
// across workers at any granularity without changing any stream.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Small deterministic generator (SplitMix64 stream).  Not crypto; plenty for
// Monte-Carlo sampling and randomized tests.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n); n > 0.  Rejection-free modulo is fine here: n is tiny
  // compared to 2^64 in every call site, bias < 2^-50.
  uint64_t below(uint64_t n) { return u64() % n; }

  bool bit() { return u64() >> 63; }

  // Uniform double in [0,1) with 53 random bits.
  double uniform() { return (u64() >> 11) * 0x1.0p-53; }

  static Rng for_shot(uint64_t master_seed, uint64_t shot_index) {
    return Rng(mix64(master_seed ^ mix64(shot_index)));
  }

 private:
  uint64_t state_;
};

}  // namespace stairway
