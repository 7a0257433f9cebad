#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "dinfo/errors.hpp"

namespace dinfo {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// is pinned by the standard) and derives all variates through fixed
// arithmetic, so the same seed yields the same draws on every platform.
// std::uniform_real_distribution and friends are implementation-defined and
// must not be used anywhere results need to be reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Unit-rate exponential via inverse CDF.
  double unit_exponential() { return -std::log1p(-uniform01()); }

  // Index draw by CDF walk; probs must be nonnegative and sum to ~1.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw SelectorError("categorical: empty support");
    double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
  }

 private:
  std::mt19937_64 gen_;
};

// Stateless 64-bit mix (splitmix64 finalizer). Used to derive per-trial seeds
// from a master seed without correlation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dinfo
