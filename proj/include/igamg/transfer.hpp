#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include "igamg/tensor_ops.hpp"
#include "igamg/tensor_space.hpp"
#include "igamg/two_scale.hpp"

namespace igamg {

/// Tensor-product prolongation between nested spline spaces, acting on the
/// Dirichlet-reduced coefficient vectors. Restriction is the transpose.
struct TensorTransfer {
  int d = 0;
  TensorShape coarse_shape, fine_shape;
  std::array<TwoScaleOp, 3> dir;  // reduced two-scale operators

  void prolong(const double* xc, double* xf) const {
    apply_steps(xc, xf, true);
  }
  void restrict_(const double* xf, double* xc) const {
    apply_steps(xf, xc, false);
  }

  Eigen::VectorXd prolong(const Eigen::VectorXd& xc) const {
    Eigen::VectorXd xf(fine_shape.total());
    prolong(xc.data(), xf.data());
    return xf;
  }
  Eigen::VectorXd restrict_(const Eigen::VectorXd& xf) const {
    Eigen::VectorXd xc(coarse_shape.total());
    restrict_(xf.data(), xc.data());
    return xc;
  }

 private:
  void apply_steps(const double* src0, double* dst_final, bool prolong_dir) const {
    // sweep one direction at a time; shapes change per step
    TensorShape cur = prolong_dir ? coarse_shape : fine_shape;
    const double* src = src0;
    for (int k = 0; k < d; ++k) {
      TensorShape next = cur;
      next.n[k] = prolong_dir ? dir[k].nf : dir[k].nc;
      double* dst;
      if (k == d - 1) {
        dst = dst_final;
      } else {
        auto& buf = (k % 2 == 0) ? t1_ : t2_;
        if (buf.size() < static_cast<Eigen::Index>(next.total()))
          buf.resize(next.total());
        dst = buf.data();
      }
      apply_two_scale_dir(dir[k], prolong_dir, k, cur, src, dst);
      cur = next;
      src = dst;
    }
  }
  mutable Eigen::VectorXd t1_, t2_;
};

inline TensorTransfer make_transfer(const TensorSpace& coarse, const TensorSpace& fine) {
  if (coarse.d != fine.d) throw std::invalid_argument("make_transfer: dimension mismatch");
  TensorTransfer T;
  T.d = coarse.d;
  T.coarse_shape = coarse.shape();
  T.fine_shape = fine.shape();
  for (int k = 0; k < T.d; ++k) {
    const TwoScaleOp full = two_scale_matrix(coarse.dir[k]->kv, fine.dir[k]->kv);
    T.dir[k] = drop_ends_two_scale(full);
    if (T.dir[k].nc != coarse.dir[k]->n || T.dir[k].nf != fine.dir[k]->n)
      throw std::runtime_error("make_transfer: reduced two-scale size mismatch");
  }
  return T;
}

/// Dense matrix of the reduced tensor prolongation (test/verification use).
inline Eigen::MatrixXd transfer_dense(const TensorTransfer& T) {
  const std::size_t nc = T.coarse_shape.total();
  const std::size_t nfi = T.fine_shape.total();
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nfi, nc);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    e[j] = 1.0;
    Eigen::VectorXd col(nfi);
    T.prolong(e.data(), col.data());
    E.col(j) = col;
    e[j] = 0.0;
  }
  return E;
}

}  // namespace igamg
