#pragma once

#include <cstdint>

namespace bamlab {

// splitmix64: tiny counter-friendly mixer. We use it both as a stateless
// (seed, index) -> u64 map for reproducible parallel sampling and as the
// stepping function of the sequential Rng below.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic function of (seed, index): lets every Monte Carlo draw be
// addressed independently, so parallel and serial evaluation agree exactly.
inline uint64_t hash_u64(uint64_t seed, uint64_t index) {
  return splitmix64(seed * 0x9e3779b97f4a7c15ULL + splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double u64_to_unit(uint64_t x) { return (x >> 11) * 0x1.0p-53; }

inline double unit_draw(uint64_t seed, uint64_t index) { return u64_to_unit(hash_u64(seed, index)); }

// Small sequential generator for test fixtures and instance generators.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }
  // in [0, 1)
  double next_unit() { return u64_to_unit(next_u64()); }
  // in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  // in {0, 1, ..., n-1}
  int next_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

 private:
  uint64_t state_;
};

}  // namespace bamlab
