#pragma once

#include <cstdint>
#include <random>

namespace d2d {

// Deterministic random source. The mt19937_64 engine is bit-exact by the
// standard, but the standard library distributions are not, so every variate
// used by the simulator is derived here from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0,1) with 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // unit-mean exponential; |h|^2 of a CN(0,1) fade
  double exponential() { return -std::log1p(-uniform01()); }

  // uniform integer in [0, n)
  uint64_t uniform_index(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Substream seed for worker index `index` under a master seed. Splitmix-style
// mixing keeps streams decorrelated without shared state.
uint64_t derive_seed(uint64_t seed, uint64_t index);

}  // namespace d2d
