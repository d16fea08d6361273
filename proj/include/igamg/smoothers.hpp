#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "igamg/csr.hpp"
#include "igamg/direction_split.hpp"
#include "igamg/tensor_ops.hpp"
#include "igamg/tensor_space.hpp"

namespace igamg {

using ApplyFn = std::function<void(const double*, double*)>;

namespace detail {

inline Eigen::MatrixXd kron_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c)
      K.block(r * B.rows(), c * B.cols(), B.rows(), B.cols()) = A(r, c) * B;
  return K;
}

}  // namespace detail

/// Subspace-corrected mass smoother. The reduced tensor space splits per
/// direction into a boundary-constrained part S0 (where pure second
/// derivatives obey the inverse inequality with constant sigma) and a small
/// complement S1. For every subspace V_alpha = (x)_k S^{alpha_k} the local
/// operator keeps the univariate second-order blocks of the S1 directions and
/// replaces each S0 direction's contribution by sigma times mass:
///   L_alpha = ((x)_{zeros} M0) (x) D_alpha,
///   D_alpha = sum_{i in ones} (x)_{k in ones}(B1 if k=i else M1)
///           + (z sigma + beta) (x)_{ones} M1,    z = #zeros.
/// The correction is  z = sum_alpha P_alpha L_alpha^{-1} P_alpha^T r.
class SubspaceMassSmoother {
 public:
  SubspaceMassSmoother(const TensorSpace& sp, double sigma, double beta, double tau)
      : sp_(sp), shape_(sp.shape()), sigma_(sigma), beta_(beta), tau_(tau) {
    const int d = sp.d;
    for (int mask = 0; mask < (1 << d); ++mask) {
      Sub sub;
      sub.mask = mask;
      sub.shape = shape_;
      bool empty = false;
      for (int k = 0; k < d; ++k) {
        const DirectionSplit& S = sp.dir[k]->split;
        if ((mask >> k) & 1) {
          if (S.n1 == 0) empty = true;
          sub.shape.n[k] = S.n1;
          sub.ones.push_back(k);
        } else {
          sub.shape.n[k] = S.n0;
          sub.zeros.push_back(k);
        }
      }
      if (empty) continue;
      const int z = static_cast<int>(sub.zeros.size());
      if (!sub.ones.empty()) {
        Eigen::MatrixXd D;
        bool first = true;
        for (int i : sub.ones) {
          Eigen::MatrixXd T(1, 1);
          T(0, 0) = 1.0;
          for (int k : sub.ones) {
            const DirectionSplit& S = sp.dir[k]->split;
            T = detail::kron_dense(k == i ? S.B1 : S.M1, T);
          }
          if (first) {
            D = T;
            first = false;
          } else {
            D += T;
          }
        }
        Eigen::MatrixXd Mhat(1, 1);
        Mhat(0, 0) = 1.0;
        for (int k : sub.ones) Mhat = detail::kron_dense(sp.dir[k]->split.M1, Mhat);
        D += (z * sigma_ + beta_) * Mhat;
        sub.q = static_cast<int>(D.rows());
        sub.D.compute(D);
        if (sub.D.info() != Eigen::Success)
          throw std::runtime_error("subspace smoother: ones-block not SPD");
      } else {
        sub.scale = 1.0 / (z * sigma_ + beta_);
      }
      subs_.push_back(std::move(sub));
    }
    std::size_t cap = 1;
    for (int k = 0; k < d; ++k) cap *= static_cast<std::size_t>(shape_.n[k]);
    b1_.resize(cap);
    b2_.resize(cap);
    jbuf_.resize(512);
  }

  std::size_t size() const { return shape_.total(); }
  double tau() const { return tau_; }

  /// z = L^{-1} r (undamped correction).
  void solve_l(const double* r, double* z) const {
    const std::size_t n = shape_.total();
    for (std::size_t i = 0; i < n; ++i) z[i] = 0.0;
    const int d = shape_.d;
    for (const Sub& sub : subs_) {
      // project: w = P_alpha^T r (direction sweeps, shapes shrink)
      TensorShape cur = shape_;
      const double* src = r;
      int flip = 0;
      for (int k = 0; k < d; ++k) {
        double* dst = (flip++ % 2 == 0) ? b1_.data() : b2_.data();
        project_dir(sub, k, cur, src, dst, true);
        cur.n[k] = sub.shape.n[k];
        src = dst;
      }
      double* w = const_cast<double*>(src);

      // solve the zero directions (banded mass Gram factors)
      for (int k : sub.zeros) solve_banded_dir(sp_.dir[k]->split.M0_chol, k, cur, w);

      // solve the joint S1 block, or apply the all-zeros scalar
      if (sub.ones.empty()) {
        const std::size_t t = cur.total();
        for (std::size_t i = 0; i < t; ++i) w[i] *= sub.scale;
      } else {
        joint_solve(sub, cur, w);
      }

      // embed back and accumulate
      for (int k = d - 1; k >= 0; --k) {
        TensorShape nxt = cur;
        nxt.n[k] = shape_.n[k];
        double* dst = (flip++ % 2 == 0) ? b1_.data() : b2_.data();
        project_dir(sub, k, cur, src, dst, false);
        cur = nxt;
        src = dst;
      }
      for (std::size_t i = 0; i < n; ++i) z[i] += src[i];
    }
  }

  /// x <- x + tau L^{-1} (b - A x)
  void smooth(const ApplyFn& apply_a, const double* b, double* x) const {
    const std::size_t n = shape_.total();
    if (r_.size() < static_cast<Eigen::Index>(n)) {
      r_.resize(n);
      c_.resize(n);
    }
    apply_a(x, r_.data());
    for (std::size_t i = 0; i < n; ++i) r_[i] = b[i] - r_[i];
    solve_l(r_.data(), c_.data());
    for (std::size_t i = 0; i < n; ++i) x[i] += tau_ * c_[i];
  }

 private:
  struct Sub {
    int mask = 0;
    TensorShape shape;
    std::vector<int> ones, zeros;
    Eigen::LLT<Eigen::MatrixXd> D;
    int q = 1;
    double scale = 1.0;
  };

  void project_dir(const Sub& sub, int k, const TensorShape& cur, const double* src,
                   double* dst, bool transpose) const {
    const DirectionSplit& S = sp_.dir[k]->split;
    if ((sub.mask >> k) & 1)
      apply_dense_dir(S.P1, transpose, k, cur, src, dst);
    else
      apply_s0_dir(S, transpose, k, cur, src, dst);
  }

  void joint_solve(const Sub& sub, const TensorShape& cur, double* w) const {
    const int q = sub.q;
    if (static_cast<int>(jbuf_.size()) < q) jbuf_.resize(q);
    // strides of the ones directions in the alpha-shaped tensor
    std::array<std::size_t, 3> stride = {0, 0, 0};
    {
      std::size_t s = 1;
      for (int k = 0; k < cur.d; ++k) {
        stride[k] = s;
        s *= static_cast<std::size_t>(cur.n[k]);
      }
    }
    // enumerate the zero-direction multi-indices
    std::array<int, 3> zi = {0, 0, 0};
    const int nz = static_cast<int>(sub.zeros.size());
    for (;;) {
      std::size_t base = 0;
      for (int t = 0; t < nz; ++t)
        base += static_cast<std::size_t>(zi[t]) * stride[sub.zeros[t]];
      // gather the joint S1 vector (ones dirs, ascending => fastest first)
      std::array<int, 3> oi = {0, 0, 0};
      const int no = static_cast<int>(sub.ones.size());
      for (int t = 0; t < q; ++t) {
        std::size_t off = base;
        for (int u = 0; u < no; ++u)
          off += static_cast<std::size_t>(oi[u]) * stride[sub.ones[u]];
        jbuf_[t] = w[off];
        for (int u = 0; u < no; ++u) {
          if (++oi[u] < cur.n[sub.ones[u]]) break;
          oi[u] = 0;
        }
      }
      Eigen::Map<Eigen::VectorXd> v(jbuf_.data(), q);
      v = sub.D.solve(v).eval();
      oi = {0, 0, 0};
      for (int t = 0; t < q; ++t) {
        std::size_t off = base;
        for (int u = 0; u < no; ++u)
          off += static_cast<std::size_t>(oi[u]) * stride[sub.ones[u]];
        w[off] = jbuf_[t];
        for (int u = 0; u < no; ++u) {
          if (++oi[u] < cur.n[sub.ones[u]]) break;
          oi[u] = 0;
        }
      }
      int t = 0;
      for (; t < nz; ++t) {
        if (++zi[t] < cur.n[sub.zeros[t]]) break;
        zi[t] = 0;
      }
      if (t == nz) break;
    }
  }

  TensorSpace sp_;
  TensorShape shape_;
  double sigma_, beta_, tau_;
  std::vector<Sub> subs_;
  mutable std::vector<double> b1_, b2_, jbuf_;
  mutable Eigen::VectorXd r_, c_;
};

// --------------------------------------------------------------------------
// Uniform smoother interface for the multigrid cycle
// --------------------------------------------------------------------------

/// One in-place smoothing step x <- S(x, b). Every implementation is
/// self-adjoint in the A-inner product, so one pre- and one post-application
/// yield a symmetric multigrid preconditioner.
struct Smoother {
  virtual ~Smoother() = default;
  virtual void smooth(const double* b, double* x) const = 0;
  /// Step from the zero iterate. Identical result to zero-fill + smooth();
  /// implementations may skip the trivial residual computation.
  virtual void smooth_zero(std::size_t n, const double* b, double* x) const {
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
    smooth(b, x);
  }
};

/// Symmetric Gauss-Seidel: one forward and one backward sweep.
class SgsSmoother final : public Smoother {
 public:
  explicit SgsSmoother(std::shared_ptr<const CsrMatrix> A) : A_(std::move(A)) {}
  void smooth(const double* b, double* x) const override {
    A_->gs_forward(b, x);
    A_->gs_backward(b, x);
  }

 private:
  std::shared_ptr<const CsrMatrix> A_;
};

/// Damped subspace-corrected mass smoother step.
class ScmsSmoother final : public Smoother {
 public:
  ScmsSmoother(std::shared_ptr<const SubspaceMassSmoother> scms, ApplyFn apply_a)
      : scms_(std::move(scms)), apply_a_(std::move(apply_a)) {}
  void smooth(const double* b, double* x) const override {
    scms_->smooth(apply_a_, b, x);
  }
  void smooth_zero(std::size_t n, const double* b, double* x) const override {
    // b - A*0 = b exactly, so the correction applies to b directly
    scms_->solve_l(b, x);
    const double t = scms_->tau();
    for (std::size_t i = 0; i < n; ++i) x[i] *= t;
  }

 private:
  std::shared_ptr<const SubspaceMassSmoother> scms_;
  ApplyFn apply_a_;
};

/// Forward Gauss-Seidel sweep, damped mass-smoother correction, backward
/// Gauss-Seidel sweep; the composition is A-self-adjoint.
class HybridSmoother final : public Smoother {
 public:
  HybridSmoother(std::shared_ptr<const CsrMatrix> A,
                 std::shared_ptr<const SubspaceMassSmoother> scms)
      : A_(std::move(A)), scms_(std::move(scms)) {}
  void smooth(const double* b, double* x) const override {
    A_->gs_forward(b, x);
    scms_->smooth([this](const double* v, double* y) { A_->matvec(v, y); }, b, x);
    A_->gs_backward(b, x);
  }

 private:
  std::shared_ptr<const CsrMatrix> A_;
  std::shared_ptr<const SubspaceMassSmoother> scms_;
};

}  // namespace igamg
