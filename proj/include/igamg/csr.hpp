#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "igamg/banded.hpp"
#include "igamg/tensor_ops.hpp"

namespace igamg {

/// Compressed sparse row matrix with sorted column indices per row (the
/// Gauss–Seidel sweeps rely on in-row ordering only through the diagonal
/// lookup, but sorted rows keep construction and comparison deterministic).
struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> rowptr;  // size n+1
  std::vector<int> col;
  std::vector<double> val;

  std::int64_t nnz() const { return rowptr.empty() ? 0 : rowptr[n]; }

  void matvec(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }

  /// One forward Gauss–Seidel sweep in ascending row order:
  /// x_i <- (b_i - sum_{j != i} a_ij x_j) / a_ii.
  void gs_forward(const double* b, double* x) const {
    for (int i = 0; i < n; ++i) {
      double s = b[i], d = 0.0;
      for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) {
        if (col[k] == i)
          d = val[k];
        else
          s -= val[k] * x[col[k]];
      }
      x[i] = s / d;
    }
  }

  /// One backward Gauss–Seidel sweep in descending row order.
  void gs_backward(const double* b, double* x) const {
    for (int i = n - 1; i >= 0; --i) {
      double s = b[i], d = 0.0;
      for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) {
        if (col[k] == i)
          d = val[k];
        else
          s -= val[k] * x[col[k]];
      }
      x[i] = s / d;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> dg(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
        if (col[k] == i) dg[i] = val[k];
    return dg;
  }
};

/// One term of a Kronecker sum: coeff * (F_{d-1} (x) ... (x) F_0) with F_k
/// acting along tensor direction k.
struct KronTerm {
  double coeff = 1.0;
  std::array<const BandedSym*, 3> factor = {nullptr, nullptr, nullptr};
};

/// Materialize a sum of Kronecker terms as CSR. All factors along a direction
/// must share extent and bandwidth (true for the spline Galerkin factors).
inline CsrMatrix csr_from_kron(const TensorShape& s, const std::vector<KronTerm>& terms) {
  const int d = s.d;
  std::array<int, 3> n = s.n, bw = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    bw[k] = terms.at(0).factor[k]->bandwidth();
    for (const auto& t : terms)
      if (t.factor[k]->rows() != n[k] || t.factor[k]->bandwidth() != bw[k])
        throw std::invalid_argument("csr_from_kron: inconsistent factor shapes");
  }

  CsrMatrix A;
  A.n = static_cast<int>(s.total());
  A.rowptr.assign(A.n + 1, 0);

  std::array<int, 3> idx = {0, 0, 0};
  // pass 1: row sizes
  for (int r = 0; r < A.n; ++r) {
    std::int64_t cnt = 1;
    for (int k = 0; k < d; ++k) {
      const int lo = std::max(0, idx[k] - bw[k]);
      const int hi = std::min(n[k] - 1, idx[k] + bw[k]);
      cnt *= (hi - lo + 1);
    }
    A.rowptr[r + 1] = A.rowptr[r] + cnt;
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < n[k]) break;
      idx[k] = 0;
    }
  }
  A.col.resize(A.rowptr[A.n]);
  A.val.resize(A.rowptr[A.n]);

  // pass 2: columns ascending (outer directions slowest) and values
  idx = {0, 0, 0};
  const int nterms = static_cast<int>(terms.size());
  for (int r = 0; r < A.n; ++r) {
    std::int64_t pos = A.rowptr[r];
    std::array<int, 3> jlo = {0, 0, 0}, jhi = {0, 0, 0}, j = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
      jlo[k] = std::max(0, idx[k] - bw[k]);
      jhi[k] = std::min(n[k] - 1, idx[k] + bw[k]);
      j[k] = jlo[k];
    }
    for (;;) {
      int c = 0;
      for (int k = d - 1; k >= 0; --k) c = c * n[k] + j[k];
      double v = 0.0;
      for (int t = 0; t < nterms; ++t) {
        double pv = terms[t].coeff;
        for (int k = 0; k < d; ++k) pv *= terms[t].factor[k]->entry(idx[k], j[k]);
        v += pv;
      }
      A.col[pos] = c;
      A.val[pos] = v;
      ++pos;
      int k = 0;
      for (; k < d; ++k) {
        if (++j[k] <= jhi[k]) break;
        j[k] = jlo[k];
      }
      if (k == d) break;
    }
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < n[k]) break;
      idx[k] = 0;
    }
  }
  return A;
}

/// Dense copy (coarse-level direct solves and verification probes).
inline Eigen::MatrixXd csr_to_dense(const CsrMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.n, A.n);
  for (int i = 0; i < A.n; ++i)
    for (std::int64_t k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) D(i, A.col[k]) += A.val[k];
  return D;
}

}  // namespace igamg
