#pragma once

#include <cmath>

namespace igamg {

/// Manufactured data for the second biharmonic problem
///   beta u + Delta^2 u = f  in Omega,  u = g1,  Delta u = g2  on dOmega,
/// built from u(x) = prod_k sin(pi x_k):
///   Delta u = -d pi^2 u,  Delta^2 u = d^2 pi^4 u,
///   f = (beta + d^2 pi^4) u,  g1 = u,  g2 = -d pi^2 u.
struct ManufacturedProblem {
  int d = 2;

  double u(const double* x) const {
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= std::sin(M_PI * x[k]);
    return v;
  }
  double g1(const double* x) const { return u(x); }
  double g2(const double* x) const { return -d * M_PI * M_PI * u(x); }
  double f(const double* x, double beta) const { return (beta + bilaplacian_factor()) * u(x); }
  /// Delta^2 u = (d^2 pi^4) u
  double bilaplacian_factor() const { return static_cast<double>(d) * d * std::pow(M_PI, 4); }
};

}  // namespace igamg
