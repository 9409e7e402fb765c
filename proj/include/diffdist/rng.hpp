// Deterministic 64-bit generator used for every random draw in the project.
//
// The generator is SplitMix64 (Steele, Lea, Vigna): state advances by the
// golden-ratio increment and each output is a finalizing hash of the state.
// Substreams are derived by hashing (seed, stream index) so that workers can
// generate disjoint index ranges concurrently with bit-identical output.
#pragma once

#include <cstdint>

namespace diffdist {

// Finalizer of SplitMix64 (Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform value in [0, bound) via rejection sampling; bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Independent substream seed for (seed, stream). Used for per-pair dataset
// substreams, per-epoch shuffles and per-cell grid seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) {
  return derive_seed(derive_seed(seed, a, b), c);
}

}  // namespace diffdist
