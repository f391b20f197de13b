#pragma once

#include <cstdint>
#include <random>

namespace epinode {

// Deterministic uniform generator. The mt19937_64 stream is fixed by the
// standard, and the mapping to doubles below avoids distribution objects
// whose output is implementation-defined, so seeded runs are reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  uint64_t below(uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace epinode
