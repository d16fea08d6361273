#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace igamg {

/// Gauss–Legendre rule; nodes/weights on the reference interval [-1, 1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Newton iteration on Legendre polynomials (exact for degree <= 2n-1).
inline QuadRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute p0 for the converged x to get the weight
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;  // symmetrize the middle node exactly
  return q;
}

/// Map a reference rule to the interval [a, b].
inline QuadRule map_to_interval(const QuadRule& ref, double a, double b) {
  QuadRule q = ref;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < q.size(); ++i) {
    q.nodes[i] = mid + half * ref.nodes[i];
    q.weights[i] = half * ref.weights[i];
  }
  return q;
}

}  // namespace igamg
