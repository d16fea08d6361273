#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "igamg/banded.hpp"
#include "igamg/bspline.hpp"
#include "igamg/tensor_ops.hpp"

namespace igamg {

/// Univariate splitting of the Dirichlet-reduced spline space S into
///   S0 = { v : v^(2l)(0) = v^(2l)(1) = 0 for all l >= 1 with 2l < p }
/// and its L2-orthogonal complement S1. With m = floor((p-1)/2) constraints
/// per endpoint, dim S1 = 2m on all but degenerate (very coarse) spaces.
///
/// S0 is represented by an embedding P0 (n x n0). On grids with enough basis
/// functions the left and right constraint blocks act on disjoint index
/// ranges [0, 2m) and [n-2m, n), and P0 is block diagonal:
/// per-endpoint null-space blocks NL/NR plus an identity middle. Otherwise a
/// dense global null-space basis is used. S1 carries an M-orthonormal basis
/// P1 = M^{-1} C^T (post-orthonormalized), so P1' M P1 = I up to roundoff.
struct DirectionSplit {
  int n = 0, n0 = 0, n1 = 0, m = 0;
  bool structured = false;

  Eigen::MatrixXd NL, NR;     // (2m x m) endpoint null-space blocks (structured)
  Eigen::MatrixXd P0_dense;   // (n x n0) fallback embedding
  Eigen::MatrixXd P1;         // (n x n1) M-orthonormal complement basis

  BandedSym M0;               // P0' M P0
  BandedChol M0_chol;
  Eigen::MatrixXd M1, B1;     // (n1 x n1) split Galerkin blocks

  Eigen::MatrixXd s0_dense() const {
    if (!structured) return P0_dense;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n0);
    P.block(0, 0, 2 * m, m) = NL;
    for (int k = 0; k < n - 4 * m; ++k) P(2 * m + k, m + k) = 1.0;
    P.block(n - 2 * m, n0 - m, 2 * m, m) = NR;
    return P;
  }
};

namespace detail {

/// Constraint matrix rows: even endpoint derivatives of the reduced basis.
/// Row l-1 (left) and row m+l-1 (right) hold order-2l derivatives, l = 1..m.
/// Rows are normalized to unit Euclidean norm (spans are scale invariant).
inline Eigen::MatrixXd constraint_matrix(const KnotVector& kv, int m) {
  const int p = kv.degree;
  const int n = kv.num_basis() - 2;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * m, n);
  if (m == 0) return C;
  const BasisDers left = eval_basis(kv, kv.a(), 2 * m);
  const BasisDers right = eval_basis(kv, kv.b(), 2 * m);
  for (int l = 1; l <= m; ++l) {
    for (int j = 0; j <= p; ++j) {
      const int fl = left.first_index + j;   // full index at x = a
      if (fl >= 1 && fl <= n) C(l - 1, fl - 1) = left.ders(2 * l, j);
      const int fr = right.first_index + j;  // full index at x = b
      if (fr >= 1 && fr <= n) C(m + l - 1, fr - 1) = right.ders(2 * l, j);
    }
  }
  for (int r = 0; r < 2 * m; ++r) {
    const double nr = C.row(r).norm();
    if (nr > 0.0) C.row(r) /= nr;
  }
  return C;
}

}  // namespace detail

/// Build the S0/S1 split for one direction from the full knot vector and the
/// Dirichlet-reduced mass and second-derivative Galerkin matrices.
inline DirectionSplit build_direction_split(const KnotVector& kv, const BandedSym& M,
                                            const BandedSym& B,
                                            bool force_dense_nullspace = false) {
  const int p = kv.degree;
  const int n = M.rows();
  if (n != kv.num_basis() - 2) throw std::invalid_argument("split: size mismatch");

  DirectionSplit S;
  S.n = n;
  S.m = (p - 1) / 2;
  const int m = S.m;
  const Eigen::MatrixXd C = detail::constraint_matrix(kv, m);

  // ----- S1 basis: M^{-1} C^T, M-orthonormalized through the Gram spectrum
  BandedChol Mchol;
  if (!Mchol.factor(M)) throw std::runtime_error("split: mass matrix not SPD");
  if (m > 0) {
    Eigen::MatrixXd P1 = C.transpose();
    for (int c = 0; c < P1.cols(); ++c) Mchol.solve(P1.col(c).data());
    const Eigen::MatrixXd gram = C * P1;  // = P1' M P1 exactly
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lmax = es.eigenvalues().maxCoeff();
    int keep = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 1e-12 * lmax) ++keep;
    const int rank = keep;
    Eigen::MatrixXd T(2 * m, rank);
    int c = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 1e-12 * lmax)
        T.col(c++) = es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()[i]);
    S.P1 = P1 * T;
    S.n1 = rank;
  } else {
    S.P1 = Eigen::MatrixXd::Zero(n, 0);
    S.n1 = 0;
  }
  S.n0 = n - S.n1;

  // ----- S0 embedding: structured per-endpoint kernels when the constraint
  // blocks are disjoint and clean, dense global kernel otherwise.
  bool structured = !force_dense_nullspace && m > 0 && n >= 4 * m && S.n1 == 2 * m;
  if (structured) {
    // constraints must touch only the first/last 2m reduced functions
    for (int l = 0; l < m && structured; ++l) {
      for (int j = 2 * m; j < n; ++j)
        if (std::abs(C(l, j)) > 1e-13) structured = false;
      for (int j = 0; j < n - 2 * m; ++j)
        if (std::abs(C(m + l, j)) > 1e-13) structured = false;
    }
  }
  if (structured) {
    const Eigen::MatrixXd CL = C.topLeftCorner(m, 2 * m);
    const Eigen::MatrixXd CR = C.bottomRightCorner(m, 2 * m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svdL(CL, Eigen::ComputeFullV);
    Eigen::JacobiSVD<Eigen::MatrixXd> svdR(CR, Eigen::ComputeFullV);
    const auto ok = [&](const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
      return svd.singularValues()(m - 1) > 1e-10 * svd.singularValues()(0);
    };
    if (ok(svdL) && ok(svdR)) {
      S.structured = true;
      S.NL = svdL.matrixV().rightCols(m);
      S.NR = svdR.matrixV().rightCols(m);
    } else {
      structured = false;
    }
  }
  if (!structured) {
    S.structured = false;
    if (m == 0) {
      S.P0_dense = Eigen::MatrixXd::Identity(n, n);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
      const double smax = svd.singularValues()(0);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
      if (n - rank != S.n0)
        throw std::runtime_error("split: constraint rank inconsistent with S1 dimension");
      S.P0_dense = svd.matrixV().rightCols(S.n0);
    }
  }

  // ----- split Galerkin blocks
  const Eigen::MatrixXd P0 = S.s0_dense();
  Eigen::MatrixXd MP0(n, S.n0);
  for (int c = 0; c < S.n0; ++c) M.matvec(P0.col(c).data(), MP0.col(c).data());
  int bw = S.structured ? std::min(S.n0 - 1, m + p) : (S.n0 > 0 ? S.n0 - 1 : 0);
  if (S.structured && n <= 4 * m + p - 1) bw = S.n0 - 1;  // end blocks may touch
  S.M0 = BandedSym(S.n0, std::max(bw, 0));
  for (int j = 0; j < S.n0; ++j)
    for (int i = j; i <= std::min(S.n0 - 1, j + S.M0.bandwidth()); ++i) {
      const double v = P0.col(i).dot(MP0.col(j));
      S.M0.at(i, j) = v;
    }
  if (S.n0 > 0 && !S.M0_chol.factor(S.M0))
    throw std::runtime_error("split: projected mass block not SPD");

  if (S.n1 > 0) {
    Eigen::MatrixXd MP1(n, S.n1), BP1(n, S.n1);
    for (int c = 0; c < S.n1; ++c) {
      M.matvec(S.P1.col(c).data(), MP1.col(c).data());
      B.matvec(S.P1.col(c).data(), BP1.col(c).data());
    }
    S.M1 = S.P1.transpose() * MP1;
    S.B1 = S.P1.transpose() * BP1;
  } else {
    S.M1.resize(0, 0);
    S.B1.resize(0, 0);
  }
  return S;
}

/// Apply the S0 embedding (or its transpose) along one tensor direction.
/// transpose=false: x has extent n0 along dir, y gets extent n.
inline void apply_s0_dir(const DirectionSplit& S, bool transpose, int dir, const TensorShape& sx,
                         const double* x, double* y) {
  if (!S.structured) {
    apply_dense_dir(S.P0_dense, transpose, dir, sx, x, y);
    return;
  }
  const int n = S.n, n0 = S.n0, m = S.m;
  const int mid = n - 4 * m;
  const int in_len = transpose ? n : n0;
  const int out_len = transpose ? n0 : n;
  const std::size_t I = sx.inner(dir), O = sx.outer(dir);
  const std::size_t bx = I * static_cast<std::size_t>(in_len);
  const std::size_t by = I * static_cast<std::size_t>(out_len);
  for (std::size_t o = 0; o < O; ++o) {
    const double* xb = x + o * bx;
    double* yb = y + o * by;
    for (std::size_t t = 0; t < by; ++t) yb[t] = 0.0;
    if (!transpose) {
      // y[0:2m) = NL x[0:m); y[2m+k] = x[m+k]; y[n-2m:) = NR x[n0-m:)
      for (int r = 0; r < 2 * m; ++r)
        for (int c = 0; c < m; ++c) {
          const double vl = S.NL(r, c), vr = S.NR(r, c);
          const double* xl = xb + c * I;
          const double* xr = xb + (n0 - m + c) * I;
          double* ylr = yb + r * I;
          double* yrr = yb + (n - 2 * m + r) * I;
          for (std::size_t t = 0; t < I; ++t) {
            ylr[t] += vl * xl[t];
            yrr[t] += vr * xr[t];
          }
        }
      for (int k = 0; k < mid; ++k) {
        const double* xk = xb + (m + k) * I;
        double* yk = yb + (2 * m + k) * I;
        for (std::size_t t = 0; t < I; ++t) yk[t] = xk[t];
      }
    } else {
      for (int r = 0; r < 2 * m; ++r)
        for (int c = 0; c < m; ++c) {
          const double vl = S.NL(r, c), vr = S.NR(r, c);
          const double* xlr = xb + r * I;
          const double* xrr = xb + (n - 2 * m + r) * I;
          double* yl = yb + c * I;
          double* yr = yb + (n0 - m + c) * I;
          for (std::size_t t = 0; t < I; ++t) {
            yl[t] += vl * xlr[t];
            yr[t] += vr * xrr[t];
          }
        }
      for (int k = 0; k < mid; ++k) {
        const double* xk = xb + (2 * m + k) * I;
        double* yk = yb + (m + k) * I;
        for (std::size_t t = 0; t < I; ++t) yk[t] = xk[t];
      }
    }
  }
}

}  // namespace igamg
