#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace polarimeter {

/// SplitMix64. Small, fast, and fully specified, so sampled results are
/// identical across standard libraries (std distributions are not).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a list of keys.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) {
  Rng mix(base ^ (key * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  mix();
  return mix();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k1, std::uint64_t k2) {
  return derive_seed(derive_seed(base, k1), k2);
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Uniform sample of `count` distinct indices from [0, n), returned sorted.
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t count, Rng& rng);

}  // namespace polarimeter
