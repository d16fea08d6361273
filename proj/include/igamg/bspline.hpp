#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "igamg/knots.hpp"

namespace igamg {

/// Values and derivatives of the degree+1 B-spline basis functions that are
/// nonzero at x. `ders(k, j)` holds the k-th derivative of basis function
/// `first_index + j`. Derivative orders beyond the polynomial degree are zero.
struct BasisDers {
  int first_index = 0;           // global index of the first active function
  Eigen::MatrixXd ders;          // (nders+1) x (degree+1)
};

/// Cox–de Boor triangle with derivative recurrences; valid for any requested
/// derivative order (orders > degree come out as exact zeros). At interior
/// breakpoints one-sided values from the right span are returned.
inline BasisDers eval_basis(const KnotVector& kv, double x, int nders) {
  const int p = kv.degree;
  const int i = find_span(kv, x);
  const auto& U = kv.knots;
  const int nd = std::min(nders, p);  // derivatives above p are identically zero

  BasisDers out;
  out.first_index = i - p;
  out.ders = Eigen::MatrixXd::Zero(nders + 1, p + 1);

  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[i + 1 - j];
    right[j] = U[i + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) out.ders(0, j) = ndu(j, p);

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double dd = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        dd = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        dd += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        dd += a(s2, k) * ndu(r, pk);
      }
      out.ders(k, r) = dd;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) out.ders(k, j) *= factor;
    factor *= (p - k);
  }
  return out;
}

/// Evaluate a spline with given coefficients (one per basis function).
inline double eval_spline(const KnotVector& kv, const Eigen::VectorXd& coef, double x,
                          int deriv = 0) {
  const BasisDers bd = eval_basis(kv, x, deriv);
  double s = 0.0;
  for (int j = 0; j <= kv.degree; ++j) s += coef[bd.first_index + j] * bd.ders(deriv, j);
  return s;
}

}  // namespace igamg
