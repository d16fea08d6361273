#pragma once

#include <stdexcept>
#include <vector>

#include "igamg/grid.hpp"

namespace igamg {

/// Open (clamped) knot vector of maximum smoothness: end knots repeated
/// degree+1 times, interior breakpoints with multiplicity 1, so splines are
/// C^{degree-1} across interior breakpoints.
struct KnotVector {
  std::vector<double> knots;
  int degree = 0;

  int num_basis() const { return static_cast<int>(knots.size()) - degree - 1; }
  double a() const { return knots.front(); }
  double b() const { return knots.back(); }
};

inline KnotVector make_open_knots(const Breakpoints& breaks, int degree) {
  check_breakpoints(breaks);
  if (degree < 1) throw std::invalid_argument("make_open_knots: degree must be >= 1");
  KnotVector kv;
  kv.degree = degree;
  kv.knots.reserve(breaks.size() + 2 * degree);
  for (int i = 0; i < degree; ++i) kv.knots.push_back(breaks.front());
  kv.knots.insert(kv.knots.end(), breaks.begin(), breaks.end());
  for (int i = 0; i < degree; ++i) kv.knots.push_back(breaks.back());
  return kv;
}

/// Breakpoints (distinct knots) of a knot vector.
inline Breakpoints breakpoints_of(const KnotVector& kv) {
  Breakpoints b;
  for (std::size_t i = 0; i < kv.knots.size(); ++i)
    if (b.empty() || kv.knots[i] > b.back()) b.push_back(kv.knots[i]);
  return b;
}

/// Knot span index: largest i with knots[i] <= x < knots[i+1]; at the right
/// endpoint the last nonempty span is returned, so evaluation is defined on
/// the closed interval [a, b].
inline int find_span(const KnotVector& kv, double x) {
  const int p = kv.degree;
  const int n = kv.num_basis();
  if (x < kv.a() || x > kv.b()) throw std::out_of_range("find_span: x outside knot range");
  if (x >= kv.knots[n]) return n - 1;  // right end: last span [knots[n-1], knots[n])
  int lo = p, hi = n;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (x < kv.knots[mid])
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

/// Greville abscissa of basis function i: mean of knots i+1 .. i+degree.
inline double greville(const KnotVector& kv, int i) {
  double s = 0.0;
  for (int k = 1; k <= kv.degree; ++k) s += kv.knots[i + k];
  return s / kv.degree;
}

inline std::vector<double> greville_points(const KnotVector& kv) {
  std::vector<double> g(kv.num_basis());
  for (int i = 0; i < kv.num_basis(); ++i) g[i] = greville(kv, i);
  return g;
}

}  // namespace igamg
