#pragma once

#include <cmath>
#include <cstdint>

#include "mcl/linalg.hpp"

namespace mcl {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so results do not depend on how work is split across threads.
// Each parallel task derives its own stream from the task index.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ull); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare; determinism over speed).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Complex normal_complex() { return Complex(normal(), normal()); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Haar-distributed unitary: QR of a complex Gaussian matrix with the R
// diagonal phases absorbed into Q.
MatC haar_unitary(int n, CounterRng& rng);

}  // namespace mcl
