#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace kdc {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64. Every stream is a pure function of its 64-bit key, which is what
// makes draw b reproducible from (seed, b) alone, independent of scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Key of substream `index` under `seed`.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(SplitMix64& gen) {
  return double(gen() >> 11) * 0x1.0p-53;
}

// Unbiased draw from [0, bound); Lemire multiply-shift with rejection.
inline std::uint64_t uniform_below(SplitMix64& gen, std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>(gen()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(gen()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Fisher-Yates shuffle of 0..n-1 driven by substream (seed, index).
inline void random_permutation(std::uint64_t seed, std::uint64_t index,
                               std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  SplitMix64 gen(substream(seed, index));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(
        uniform_below(gen, static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
}

}  // namespace kdc
