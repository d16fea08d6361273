#pragma once

#include <Eigen/Dense>
#include <array>
#include <cassert>
#include <cstddef>

#include "igamg/banded.hpp"
#include "igamg/two_scale.hpp"

namespace igamg {

/// Extents of a tensor of coefficients stored with direction 0 fastest
/// (Fortran order): linear index i0 + n0*(i1 + n1*i2).
struct TensorShape {
  int d = 2;
  std::array<int, 3> n = {1, 1, 1};

  std::size_t total() const {
    std::size_t t = 1;
    for (int k = 0; k < d; ++k) t *= static_cast<std::size_t>(n[k]);
    return t;
  }
  std::size_t inner(int dir) const {
    std::size_t t = 1;
    for (int k = 0; k < dir; ++k) t *= static_cast<std::size_t>(n[k]);
    return t;
  }
  std::size_t outer(int dir) const {
    std::size_t t = 1;
    for (int k = dir + 1; k < d; ++k) t *= static_cast<std::size_t>(n[k]);
    return t;
  }
  TensorShape with(int dir, int len) const {
    TensorShape s = *this;
    s.n[dir] = len;
    return s;
  }
};

inline TensorShape shape2(int n0, int n1) { return TensorShape{2, {n0, n1, 1}}; }
inline TensorShape shape3(int n0, int n1, int n2) { return TensorShape{3, {n0, n1, n2}}; }

/// y = (I (x) A (x) I) x with A acting along `dir`.
inline void apply_banded_dir(const BandedSym& A, int dir, const TensorShape& s, const double* x,
                             double* y) {
  const int nd = s.n[dir];
  assert(A.rows() == nd);
  const std::size_t I = s.inner(dir), O = s.outer(dir);
  if (I == 1) {
    for (std::size_t o = 0; o < O; ++o) A.matvec(x + o * nd, y + o * nd);
    return;
  }
  const std::size_t block = I * static_cast<std::size_t>(nd);
  for (std::size_t o = 0; o < O; ++o) {
    const double* xb = x + o * block;
    double* yb = y + o * block;
    for (int j = 0; j < nd; ++j) {
      const double dj = A.entry(j, j);
      double* yj = yb + j * I;
      const double* xj = xb + j * I;
      for (std::size_t t = 0; t < I; ++t) yj[t] = dj * xj[t];
    }
    for (int dband = 1; dband <= A.bandwidth(); ++dband) {
      for (int j = 0; j + dband < nd; ++j) {
        const double v = A.entry(j + dband, j);
        if (v == 0.0) continue;
        double* yhi = yb + (j + dband) * I;
        double* ylo = yb + j * I;
        const double* xlo = xb + j * I;
        const double* xhi = xb + (j + dband) * I;
        for (std::size_t t = 0; t < I; ++t) {
          yhi[t] += v * xlo[t];
          ylo[t] += v * xhi[t];
        }
      }
    }
  }
}

/// In-place solve with a banded Cholesky factorization along `dir`.
inline void solve_banded_dir(const BandedChol& C, int dir, const TensorShape& s, double* x) {
  const int nd = s.n[dir];
  assert(C.rows() == nd);
  const std::size_t I = s.inner(dir), O = s.outer(dir);
  if (I == 1) {
    for (std::size_t o = 0; o < O; ++o) C.solve(x + o * nd);
    return;
  }
  const int bw = C.bandwidth();
  const std::size_t block = I * static_cast<std::size_t>(nd);
  for (std::size_t o = 0; o < O; ++o) {
    double* xb = x + o * block;
    for (int j = 0; j < nd; ++j) {  // L y = b
      const double inv = 1.0 / C.l(j, j);
      double* xj = xb + j * I;
      for (std::size_t t = 0; t < I; ++t) xj[t] *= inv;
      const int imax = std::min(nd - 1, j + bw);
      for (int i = j + 1; i <= imax; ++i) {
        const double v = C.l(i, j);
        if (v == 0.0) continue;
        double* xi = xb + i * I;
        for (std::size_t t = 0; t < I; ++t) xi[t] -= v * xj[t];
      }
    }
    for (int j = nd - 1; j >= 0; --j) {  // L^T x = y
      double* xj = xb + j * I;
      const int imax = std::min(nd - 1, j + bw);
      for (int i = j + 1; i <= imax; ++i) {
        const double v = C.l(i, j);
        if (v == 0.0) continue;
        const double* xi = xb + i * I;
        for (std::size_t t = 0; t < I; ++t) xj[t] -= v * xi[t];
      }
      const double inv = 1.0 / C.l(j, j);
      for (std::size_t t = 0; t < I; ++t) xj[t] *= inv;
    }
  }
}

/// y = (I (x) Aop (x) I) x for a dense rectangular factor. The extent of x
/// along `dir` must equal cols(op) (or rows(op) when transpose is set); y gets
/// the complementary extent. Shapes of x and y otherwise agree.
inline void apply_dense_dir(const Eigen::MatrixXd& op, bool transpose, int dir,
                            const TensorShape& sx, const double* x, double* y) {
  const int in_len = transpose ? static_cast<int>(op.rows()) : static_cast<int>(op.cols());
  const int out_len = transpose ? static_cast<int>(op.cols()) : static_cast<int>(op.rows());
  assert(sx.n[dir] == in_len);
  const std::size_t I = sx.inner(dir), O = sx.outer(dir);
  if (I == 1) {
    Eigen::Map<const Eigen::MatrixXd> X(x, in_len, O);
    Eigen::Map<Eigen::MatrixXd> Y(y, out_len, O);
    if (transpose)
      Y.noalias() = op.transpose() * X;
    else
      Y.noalias() = op * X;
    return;
  }
  const std::size_t bx = I * static_cast<std::size_t>(in_len);
  const std::size_t by = I * static_cast<std::size_t>(out_len);
  for (std::size_t o = 0; o < O; ++o) {
    Eigen::Map<const Eigen::MatrixXd> X(x + o * bx, I, in_len);
    Eigen::Map<Eigen::MatrixXd> Y(y + o * by, I, out_len);
    if (transpose)
      Y.noalias() = X * op;
    else
      Y.noalias() = X * op.transpose();
  }
}

/// y = (I (x) E (x) I) x for a two-scale refinement factor (coarse-to-fine
/// when prolong, fine-to-coarse transpose when !prolong).
inline void apply_two_scale_dir(const TwoScaleOp& E, bool prolong, int dir, const TensorShape& sx,
                                const double* x, double* y) {
  const int in_len = prolong ? E.nc : E.nf;
  const int out_len = prolong ? E.nf : E.nc;
  assert(sx.n[dir] == in_len);
  const std::size_t I = sx.inner(dir), O = sx.outer(dir);
  if (I == 1) {
    for (std::size_t o = 0; o < O; ++o) {
      if (prolong)
        E.apply(x + o * in_len, y + o * out_len);
      else
        E.applyT(x + o * in_len, y + o * out_len);
    }
    return;
  }
  const std::size_t bx = I * static_cast<std::size_t>(in_len);
  const std::size_t by = I * static_cast<std::size_t>(out_len);
  for (std::size_t o = 0; o < O; ++o) {
    const double* xb = x + o * bx;
    double* yb = y + o * by;
    for (std::size_t t = 0; t < by; ++t) yb[t] = 0.0;
    if (prolong) {
      for (int i = 0; i < E.nf; ++i) {
        const double* row = E.w.data() + static_cast<std::size_t>(i) * E.width;
        double* yi = yb + i * I;
        const int kmax = std::min(E.width, E.nc - E.lo[i]);
        for (int k = 0; k < kmax; ++k) {
          const double v = row[k];
          if (v == 0.0) continue;
          const double* xk = xb + (E.lo[i] + k) * I;
          for (std::size_t t = 0; t < I; ++t) yi[t] += v * xk[t];
        }
      }
    } else {
      for (int i = 0; i < E.nf; ++i) {
        const double* row = E.w.data() + static_cast<std::size_t>(i) * E.width;
        const double* xi = xb + i * I;
        const int kmax = std::min(E.width, E.nc - E.lo[i]);
        for (int k = 0; k < kmax; ++k) {
          const double v = row[k];
          if (v == 0.0) continue;
          double* yk = yb + (E.lo[i] + k) * I;
          for (std::size_t t = 0; t < I; ++t) yk[t] += v * xi[t];
        }
      }
    }
  }
}

}  // namespace igamg
