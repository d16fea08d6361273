#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace igamg {

/// Uniform draw in [-1, 1) built from the top 53 bits of one mt19937_64 word.
/// Avoids std::uniform_real_distribution, whose output is implementation
/// defined; results must be bit-for-bit reproducible for a fixed seed.
inline double uniform_pm1(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-52 - 1.0;
}

inline void fill_uniform_pm1(std::uint64_t seed, double* x, std::size_t n) {
  std::mt19937_64 g(seed);
  for (std::size_t i = 0; i < n; ++i) x[i] = uniform_pm1(g);
}

}  // namespace igamg
