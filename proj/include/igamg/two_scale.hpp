#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "igamg/knots.hpp"

namespace igamg {

/// Rectangular two-scale (refinement) operator E with nf x nc band structure:
/// row i holds `width` consecutive coarse columns starting at lo[i]. A coarse
/// spline with coefficients c is reproduced exactly on the fine space by E c.
struct TwoScaleOp {
  int nf = 0, nc = 0, width = 0;
  std::vector<int> lo;      // size nf
  std::vector<double> w;    // size nf * width, row-major

  /// f = E c
  void apply(const double* c, double* f) const {
    for (int i = 0; i < nf; ++i) {
      double s = 0.0;
      const double* row = w.data() + static_cast<std::size_t>(i) * width;
      const int kmax = std::min(width, nc - lo[i]);
      for (int k = 0; k < kmax; ++k) s += row[k] * c[lo[i] + k];
      f[i] = s;
    }
  }
  /// c = E^T f
  void applyT(const double* f, double* c) const {
    for (int j = 0; j < nc; ++j) c[j] = 0.0;
    for (int i = 0; i < nf; ++i) {
      const double* row = w.data() + static_cast<std::size_t>(i) * width;
      const double fi = f[i];
      const int kmax = std::min(width, nc - lo[i]);
      for (int k = 0; k < kmax; ++k) c[lo[i] + k] += row[k] * fi;
    }
  }
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nf, nc);
    for (int i = 0; i < nf; ++i)
      for (int k = 0; k < width; ++k) D(i, lo[i] + k) = w[static_cast<std::size_t>(i) * width + k];
    return D;
  }
};

namespace detail {

/// One Boehm knot-insertion step applied to the accumulated refinement matrix:
/// rows are convex combinations of at most two previous rows.
inline void insert_knot_rows(std::vector<double>& T, int p, Eigen::MatrixXd& E, int& nrows,
                             double u) {
  // span: largest k with T[k] <= u < T[k+1]
  int k = static_cast<int>(T.size()) - p - 2;
  while (k > 0 && u < T[k]) --k;
  while (u >= T[k + 1] && k + 2 < static_cast<int>(T.size())) ++k;
  // shift rows k+1.. down by one
  for (int i = nrows; i >= k + 1; --i) E.row(i) = E.row(i - 1);
  // combination rows k-p+1 .. k (work upward on the shifted copy is wrong;
  // use the pre-shift originals: row i combines old rows i-1 and i, which
  // after the shift live at i-1 and i+1... avoid aliasing by a scratch copy)
  Eigen::MatrixXd old_rows = E.block(std::max(0, k - p), 0, p + 1, E.cols());
  for (int i = k - p + 1; i <= k; ++i) {
    if (i < 1) continue;
    const double denom = T[i + p] - T[i];
    const double alpha = denom > 0.0 ? (u - T[i]) / denom : 0.0;
    const int base = std::max(0, k - p);
    E.row(i) = alpha * old_rows.row(i - base) + (1.0 - alpha) * old_rows.row(i - 1 - base);
  }
  ++nrows;
  T.insert(T.begin() + (k + 1), u);
}

}  // namespace detail

/// Refinement matrix from a coarse open knot vector to a fine one. The fine
/// vector must contain the coarse knots (with multiplicity); the extra knots
/// are inserted one at a time, so rows stay convex combinations and sum to 1.
inline TwoScaleOp two_scale_matrix(const KnotVector& coarse, const KnotVector& fine) {
  if (coarse.degree != fine.degree)
    throw std::invalid_argument("two_scale_matrix: degree mismatch");
  const int p = coarse.degree;
  // multiset difference fine \ coarse, ascending
  std::vector<double> extra;
  {
    std::size_t ic = 0;
    for (std::size_t jf = 0; jf < fine.knots.size(); ++jf) {
      if (ic < coarse.knots.size() && coarse.knots[ic] == fine.knots[jf])
        ++ic;
      else
        extra.push_back(fine.knots[jf]);
    }
    if (ic != coarse.knots.size())
      throw std::invalid_argument("two_scale_matrix: coarse knots not nested in fine knots");
  }

  const int nc = coarse.num_basis();
  const int nf = fine.num_basis();
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nf, nc);
  E.topLeftCorner(nc, nc).setIdentity();
  int nrows = nc;
  std::vector<double> T = coarse.knots;
  for (double u : extra) detail::insert_knot_rows(T, p, E, nrows, u);
  if (nrows != nf) throw std::logic_error("two_scale_matrix: row count mismatch");

  TwoScaleOp op;
  op.nf = nf;
  op.nc = nc;
  op.width = p + 1;
  op.lo.resize(nf);
  op.w.assign(static_cast<std::size_t>(nf) * op.width, 0.0);
  for (int i = 0; i < nf; ++i) {
    int first = -1, last = -1;
    for (int j = 0; j < nc; ++j)
      if (E(i, j) != 0.0) {
        if (first < 0) first = j;
        last = j;
      }
    if (first < 0) throw std::logic_error("two_scale_matrix: empty row");
    if (last - first + 1 > op.width) throw std::logic_error("two_scale_matrix: row too wide");
    op.lo[i] = std::min(first, nc - op.width);
    for (int j = first; j <= last; ++j)
      op.w[static_cast<std::size_t>(i) * op.width + (j - op.lo[i])] = E(i, j);
  }
  return op;
}

/// Restrict a refinement operator to the spaces with first/last basis function
/// removed (homogeneous Dirichlet trace). Valid because an interior coarse
/// function vanishes at the endpoints, and for open knot vectors the endpoint
/// value of a spline equals its first/last coefficient: interior columns of E
/// have exact zeros in the two boundary rows.
inline TwoScaleOp drop_ends_two_scale(const TwoScaleOp& E) {
  Eigen::MatrixXd D = E.dense();
  const double tol = 1e-14;
  if (std::abs(D(0, 0) - 1.0) > tol || std::abs(D(E.nf - 1, E.nc - 1) - 1.0) > tol ||
      D.row(0).segment(1, E.nc - 1).lpNorm<Eigen::Infinity>() > tol ||
      D.row(E.nf - 1).segment(0, E.nc - 1).lpNorm<Eigen::Infinity>() > tol)
    throw std::logic_error("drop_ends_two_scale: boundary rows are not clean");

  TwoScaleOp R;
  R.nf = E.nf - 2;
  R.nc = E.nc - 2;
  R.width = E.width;
  R.lo.resize(R.nf);
  R.w.assign(static_cast<std::size_t>(R.nf) * R.width, 0.0);
  for (int i = 0; i < R.nf; ++i) {
    int first = -1, last = -1;
    for (int j = 0; j < R.nc; ++j)
      if (D(i + 1, j + 1) != 0.0) {
        if (first < 0) first = j;
        last = j;
      }
    if (first < 0) {
      R.lo[i] = 0;  // zero row cannot occur for nested knots, but keep it well-formed
      continue;
    }
    R.lo[i] = std::min(first, std::max(0, R.nc - R.width));
    for (int j = first; j <= last; ++j)
      R.w[static_cast<std::size_t>(i) * R.width + (j - R.lo[i])] = D(i + 1, j + 1);
  }
  return R;
}

}  // namespace igamg
