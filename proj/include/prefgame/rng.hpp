#pragma once

#include <cstdint>

namespace prefgame {

// Counter-based SplitMix64: draw k of stream `seed` is mix(seed + (k + 1) * golden gamma).
// Bit-identical on every platform; the uniform draw uses the top 53 bits.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return counter_; }

  // Independent stream for a sub-task, e.g. trial k of a batch.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    CounterRng r(seed ^ 0xD1B54A32D192ED03ULL);
    r.counter_ = index;
    return r.next_u64();
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace prefgame
