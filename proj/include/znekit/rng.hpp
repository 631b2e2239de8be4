#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace znekit {

/// splitmix64 step; used to derive independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministically combines a base seed with stream indices (scale index,
/// repetition index, trial index, ...) into a fresh seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = base ^ 0xa0761d6478bd642fULL;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : parts) {
    state ^= p + 0x9e3779b97f4a7c15ULL;
    out = splitmix64(state);
  }
  return out;
}

/// Seeded generator with platform-independent derived draws. mt19937_64 is
/// fully specified by the standard; the uniform/bounded helpers below avoid
/// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Modulo bias is negligible at the sizes used
  /// here (n << 2^32).
  std::size_t bounded(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = bounded(i);
      std::swap(perm[i - 1], perm[j]);
    }
    return perm;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace znekit
