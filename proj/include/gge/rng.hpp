#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace gge {

// splitmix64 finalizer. Every derived seed in the project goes through this,
// so adjacent inputs (graph 0, graph 1, ...) yield decorrelated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive 64-bit combine: mix_seed(a, b) != mix_seed(b, a).
inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// FNV-1a for strings, so seed streams depend on algorithm labels rather than
// on list positions.
inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic stream with explicit transforms; std::mt19937_64 is fully
// specified by the standard, and the transforms below avoid the
// implementation-defined std::*_distribution wrappers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // unbiased integer in [0, n), n >= 1
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  int pick(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  double normal() {
    // Box-Muller, one sample per call.
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692528676655900577 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gge
