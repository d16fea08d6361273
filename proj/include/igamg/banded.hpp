#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace igamg {

/// Symmetric banded matrix, lower-band storage by diagonals:
/// data[d*n + i] = A(i+d, i) for 0 <= d <= bw.
class BandedSym {
 public:
  BandedSym() = default;
  BandedSym(int n, int bw) : n_(n), bw_(bw), a_(static_cast<std::size_t>(bw + 1) * n, 0.0) {}

  int rows() const { return n_; }
  int bandwidth() const { return bw_; }

  double& at(int i, int j) {
    if (j > i) std::swap(i, j);
    assert(i - j <= bw_ && j >= 0 && i < n_);
    return a_[static_cast<std::size_t>(i - j) * n_ + j];
  }
  double entry(int i, int j) const {
    if (j > i) std::swap(i, j);
    if (i - j > bw_ || j < 0 || i >= n_) return 0.0;
    return a_[static_cast<std::size_t>(i - j) * n_ + j];
  }
  void add(int i, int j, double v) { at(i, j) += v; }

  /// y = A x (y overwritten).
  void matvec(const double* x, double* y) const {
    const double* diag = a_.data();
    for (int i = 0; i < n_; ++i) y[i] = diag[i] * x[i];
    for (int d = 1; d <= bw_; ++d) {
      const double* band = a_.data() + static_cast<std::size_t>(d) * n_;
      const int len = n_ - d;
      for (int i = 0; i < len; ++i) {
        y[i + d] += band[i] * x[i];
        y[i] += band[i] * x[i + d];
      }
    }
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int i = j; i <= std::min(n_ - 1, j + bw_); ++i) {
        D(i, j) = entry(i, j);
        D(j, i) = D(i, j);
      }
    return D;
  }

  /// Drop the first and last index (homogeneous Dirichlet reduction).
  BandedSym drop_ends() const {
    if (n_ < 3) throw std::invalid_argument("drop_ends: matrix too small");
    BandedSym R(n_ - 2, std::min(bw_, n_ - 3 < 0 ? 0 : n_ - 3));
    for (int j = 0; j < R.n_; ++j)
      for (int i = j; i <= std::min(R.n_ - 1, j + R.bw_); ++i) R.at(i, j) = entry(i + 1, j + 1);
    return R;
  }

  /// this += alpha * other (same shape required).
  void axpy(double alpha, const BandedSym& other) {
    assert(n_ == other.n_ && bw_ == other.bw_);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += alpha * other.a_[k];
  }
  void scale(double alpha) {
    for (auto& v : a_) v *= alpha;
  }

 private:
  int n_ = 0, bw_ = 0;
  std::vector<double> a_;
};

/// Banded Cholesky factorization A = L L^T with in-band fill.
class BandedChol {
 public:
  BandedChol() = default;

  /// Returns false if the matrix is not numerically SPD.
  bool factor(const BandedSym& A) {
    n_ = A.rows();
    bw_ = A.bandwidth();
    l_.assign(static_cast<std::size_t>(bw_ + 1) * n_, 0.0);
    for (int j = 0; j < n_; ++j)
      for (int i = j; i <= std::min(n_ - 1, j + bw_); ++i) lref(i, j) = A.entry(i, j);
    for (int j = 0; j < n_; ++j) {
      double d = lref(j, j);
      for (int k = std::max(0, j - bw_); k < j; ++k) {
        const double v = lref(j, k);
        d -= v * v;
      }
      if (!(d > 0.0)) return false;
      const double dj = std::sqrt(d);
      lref(j, j) = dj;
      for (int i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) {
        double s = lref(i, j);
        for (int k = std::max(0, i - bw_); k < j; ++k) s -= lref(i, k) * lref(j, k);
        lref(i, j) = s / dj;
      }
    }
    return true;
  }

  int rows() const { return n_; }
  int bandwidth() const { return bw_; }
  /// Factor entry L(i, j), valid for j <= i <= j + bandwidth.
  double l(int i, int j) const { return lentry(i, j); }

  /// Solve A x = b in place.
  void solve(double* x) const {
    // forward: L y = b
    for (int j = 0; j < n_; ++j) {
      const double y = x[j] / lentry(j, j);
      x[j] = y;
      for (int i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) x[i] -= lentry(i, j) * y;
    }
    // backward: L^T x = y
    for (int j = n_ - 1; j >= 0; --j) {
      double s = x[j];
      for (int i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) s -= lentry(i, j) * x[i];
      x[j] = s / lentry(j, j);
    }
  }

 private:
  double& lref(int i, int j) { return l_[static_cast<std::size_t>(i - j) * n_ + j]; }
  double lentry(int i, int j) const { return l_[static_cast<std::size_t>(i - j) * n_ + j]; }
  int n_ = 0, bw_ = 0;
  std::vector<double> l_;
};

}  // namespace igamg
