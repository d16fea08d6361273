#pragma once

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <vector>

namespace igamg {

/// Strictly increasing breakpoint sequence describing a 1D grid on [front, back].
using Breakpoints = std::vector<double>;

inline void check_breakpoints(const Breakpoints& b) {
  if (b.size() < 2) throw std::invalid_argument("breakpoints: need at least 2 points");
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (!(b[i] < b[i + 1])) throw std::invalid_argument("breakpoints: not strictly increasing");
}

/// Dyadic refinement: insert the midpoint of every interval.
inline Breakpoints refine_uniform(const Breakpoints& b) {
  check_breakpoints(b);
  Breakpoints out;
  out.reserve(2 * b.size() - 1);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    out.push_back(b[i]);
    out.push_back(0.5 * (b[i] + b[i + 1]));
  }
  out.push_back(b.back());
  return out;
}

inline Breakpoints refine_uniform(Breakpoints b, int times) {
  for (int i = 0; i < times; ++i) b = refine_uniform(b);
  return b;
}

inline double min_span(const Breakpoints& b) {
  double h = b[1] - b[0];
  for (std::size_t i = 1; i + 1 < b.size(); ++i) h = std::min(h, b[i + 1] - b[i]);
  return h;
}

inline double max_span(const Breakpoints& b) {
  double h = b[1] - b[0];
  for (std::size_t i = 1; i + 1 < b.size(); ++i) h = std::max(h, b[i + 1] - b[i]);
  return h;
}

/// Non-uniform benchmark coarse grid (0, 1/3, 1/2, 4/5, 1).
inline Breakpoints default_coarse_grid() { return {0.0, 1.0 / 3.0, 0.5, 0.8, 1.0}; }

/// Uniform coarse grid with h = 1/4.
inline Breakpoints uniform_coarse_grid() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

}  // namespace igamg
