// Seeded random source used everywhere randomness is needed. The mt19937_64
// engine output is pinned by the standard, but std::uniform_int_distribution
// and std::shuffle are implementation-defined, so bounded draws and the
// shuffle are done by hand: identical seeds must give identical corpora,
// splits and reports on every platform.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ogs {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw from [0, n). n must be positive.
  std::size_t below(std::size_t n) {
    using uint128 = unsigned __int128;
    return static_cast<std::size_t>(
        (static_cast<uint128>(next_u64()) * static_cast<uint128>(n)) >> 64);
  }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a stream tag into a base seed (splitmix64 finalizer), so per-file
/// generators are independent of generation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ogs
