#include "polarimeter/random.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace polarimeter {

std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t count, Rng& rng) {
  if (count > n) throw std::invalid_argument("sample larger than population");
  // Partial Fisher-Yates over the index range.
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace polarimeter
