#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sedil {

// Reproducible PRNG. The engine is std::mt19937_64 (bit-exact by the
// standard), and every distribution transform is implemented here rather
// than via <random> distributions, whose output is implementation-defined.
// Identical seed -> identical draw sequence on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire multiply-shift; bias is < 2^-64.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller (one value per call, no caching, so the
  // draw count stays predictable).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Deterministic child stream, e.g. one per soundscape or per scenario.
  Rng derive(uint64_t index) const { return Rng(mix(seed_, index)); }

  // splitmix64-style combiner.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

}  // namespace sedil
