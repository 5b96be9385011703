#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace spdnn {

// SplitMix64 finalizer, used as the mixing primitive of seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable stream-seed derivation: fold every word through mix64.
// hash64({base_seed, replication, stream_tag}) gives independent,
// reproducible streams for simulation, initialization and shuffling.
inline std::uint64_t hash64(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (std::uint64_t w : words) {
    h = mix64(h ^ (w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
  }
  return h;
}

inline std::uint64_t hash64(std::uint64_t a, std::uint64_t b) {
  return hash64({a, b});
}

inline std::uint64_t hash64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash64({a, b, c});
}

// Deterministic RNG wrapper. The engine is the standard-mandated
// mt19937_64; all value draws are hand-rolled on top of raw 64-bit words
// so that results do not depend on library-specific distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // U[-2, 2] draw divided by its standard deviation 2/sqrt(3); the result
  // has mean 0 and variance 1.
  double standardized_uniform() {
    return uniform(-2.0, 2.0) * (std::sqrt(3.0) / 2.0);
  }

  // Unbiased integer on [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Fisher-Yates; std::shuffle is not used because its draw sequence is
  // implementation-defined.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t k = values.size(); k > 1; --k) {
      const std::size_t j = static_cast<std::size_t>(bounded(k));
      std::swap(values[k - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spdnn
