#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace gapfit {

// Seedable generator whose output is identical on every platform: the
// 64-bit Mersenne Twister (fully specified by the standard) with
// distribution transforms implemented here rather than by the standard
// library, whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer on [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a base seed with stream coordinates (hospital index, repetition,
// ...) into an independent seed via splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

}  // namespace gapfit
