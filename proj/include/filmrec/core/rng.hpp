#pragma once

#include <cstdint>

namespace filmrec {

// xoshiro256++ seeded through splitmix64. Self-contained so that generated
// datasets are reproducible bit-for-bit across platforms and standard-library
// versions (std::uniform_real_distribution makes no such guarantee).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0,n), n >= 1.
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double gaussian();

  // Derives an independent stream seed from a base seed and an index.
  static uint64_t mix(uint64_t seed, uint64_t index) {
    uint64_t x = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    return splitmix64(x);
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace filmrec
