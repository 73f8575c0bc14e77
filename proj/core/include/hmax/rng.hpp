#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hmax {

// std::uniform_int_distribution is implementation-defined, so seeded runs
// would not reproduce across standard libraries. These helpers pin the
// draw algorithm itself.

/// Uniform draw from [0, n) by rejection. n must be > 0.
inline uint64_t bounded_draw(std::mt19937_64& g, uint64_t n) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = g();
  } while (v >= limit);
  return v % n;
}

/// Uniform real in [0, 1) with 53 bits of entropy.
inline double unit_real(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates shuffle using bounded_draw.
template <typename T>
void shuffle_inplace(std::vector<T>& v, std::mt19937_64& g) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(bounded_draw(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace hmax

