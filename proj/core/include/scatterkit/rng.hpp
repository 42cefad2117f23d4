#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace spk {

// Single seeded generator family for every random draw in the project:
// splitmix64 streams, uniforms from the top 53 bits, normals by the
// Marsaglia polar method without caching. Identical seed, identical stream
// within one build; cross-implementation bit equality is not promised.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Uniform on {0, ..., n-1}, unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t bound = max - max % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= bound);
    return r % n;
  }

  // Standard normal draw; rejection keeps the method cache-free so the
  // stream position depends only on the draws made so far.
  double normal() {
    for (;;) {
      const double u = uniform(-1.0, 1.0);
      const double v = uniform(-1.0, 1.0);
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

 private:
  std::uint64_t state_;
};

// Stateless derivation of per-item seeds: the value splitmix64 emits at
// stream position `index` when seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace spk
