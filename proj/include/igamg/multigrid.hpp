#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "igamg/csr.hpp"
#include "igamg/pcg.hpp"
#include "igamg/rng.hpp"
#include "igamg/smoothers.hpp"
#include "igamg/tensor_space.hpp"
#include "igamg/transfer.hpp"

namespace igamg {

/// One level of the geometric multigrid hierarchy. Level 0 is the coarsest
/// (direct solve); every finer level carries a smoother and the transfer to
/// the next coarser level.
struct MgLevel {
  std::size_t n = 0;
  TensorSpace space;  // keeps the univariate factor matrices alive
  ApplyFn apply_a;  // owning: captured operators keep their storage alive
  std::shared_ptr<const CsrMatrix> acsr;  // present when sweeps need it
  std::shared_ptr<const SubspaceMassSmoother> scms;
  std::unique_ptr<Smoother> smoother;  // null on level 0
  TensorTransfer to_coarse;            // valid for levels >= 1
  double h_min = 0.0, h_max = 0.0;
  mutable Eigen::VectorXd r, rc, xc;   // cycle scratch
};

/// Symmetric multigrid cycle (one pre- and one post-smoothing step) used as a
/// preconditioner for conjugate gradients and as a stationary iteration for
/// contraction measurements.  `cycles` is the recursion count of the
/// coarse-grid correction: 1 gives the V-cycle (the benchmark default),
/// 2 the W-cycle.
class Multigrid {
 public:
  std::vector<MgLevel> lv;
  Eigen::LLT<Eigen::MatrixXd> coarse;
  int cycles = 1;

  int top() const { return static_cast<int>(lv.size()) - 1; }
  std::size_t size() const { return lv.back().n; }
  const ApplyFn& apply_fine() const { return lv.back().apply_a; }

  void vcycle(int l, const double* b, double* x, bool zero_init) const {
    const MgLevel& L = lv[l];
    if (l == 0) {
      Eigen::Map<const Eigen::VectorXd> bm(b, L.n);
      Eigen::Map<Eigen::VectorXd> xm(x, L.n);
      xm = coarse.solve(bm);
      return;
    }
    if (zero_init)
      L.smoother->smooth_zero(L.n, b, x);
    else
      L.smoother->smooth(b, x);

    L.apply_a(x, L.r.data());
    for (std::size_t i = 0; i < L.n; ++i) L.r[i] = b[i] - L.r[i];
    L.to_coarse.restrict_(L.r.data(), L.rc.data());
    vcycle(l - 1, L.rc.data(), L.xc.data(), true);
    for (int c = 1; c < cycles; ++c) vcycle(l - 1, L.rc.data(), L.xc.data(), false);
    L.to_coarse.prolong(L.xc.data(), L.r.data());
    for (std::size_t i = 0; i < L.n; ++i) x[i] += L.r[i];

    L.smoother->smooth(b, x);
  }

  /// Preconditioner action: one V-cycle from the zero iterate.
  void prec(const double* r, double* z) const { vcycle(top(), r, z, true); }
};

/// PCG on the finest level, preconditioned by one V-cycle, started from a
/// deterministic random iterate with entries uniform in [-1, 1].
inline SolveReport mg_pcg_solve(const Multigrid& mg, const Eigen::VectorXd& rhs,
                                Eigen::VectorXd& x, double rel_tol, int max_iters,
                                std::uint64_t seed) {
  const std::size_t n = mg.size();
  x.resize(n);
  fill_uniform_pm1(seed, x.data(), n);
  return pcg(
      n, [&](const double* v, double* y) { mg.apply_fine()(v, y); },
      [&](const double* r, double* z) { mg.prec(r, z); }, rhs.data(), x.data(), rel_tol,
      max_iters);
}

/// A-norm contraction factor of the stationary V-cycle iteration on the
/// homogeneous system, estimated as the geometric mean over the tail of the
/// iteration (the transient from the random start decays first).
inline double measure_contraction(const Multigrid& mg, int iters, std::uint64_t seed) {
  const std::size_t n = mg.size();
  Eigen::VectorXd x(n), ax(n), b = Eigen::VectorXd::Zero(n);
  fill_uniform_pm1(seed, x.data(), n);
  const auto anorm = [&]() {
    mg.apply_fine()(x.data(), ax.data());
    return std::sqrt(std::max(0.0, x.dot(ax)));
  };
  double q0 = anorm();
  const int tail_start = iters / 2;
  double q_tail = 0.0;
  int k = 0;
  double q_prev = q0;
  double q_at_tail = q0;
  for (k = 1; k <= iters; ++k) {
    mg.vcycle(mg.top(), b.data(), x.data(), false);
    const double q = anorm();
    if (k == tail_start) q_at_tail = q;
    q_tail = q;
    if (q < 1e-280 * q0 || q == 0.0) break;  // fully converged; rate from data so far
    q_prev = q;
  }
  (void)q_prev;
  if (k <= tail_start || q_at_tail == 0.0)
    return std::pow(q_tail / q0, 1.0 / std::max(1, k));
  return std::pow(q_tail / q_at_tail, 1.0 / (k - tail_start));
}

}  // namespace igamg
