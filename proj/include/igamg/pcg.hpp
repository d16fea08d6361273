#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace igamg {

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // Euclidean norms, starting with ||r_0||
  double final_relative_residual = 0.0;
};

/// Preconditioned conjugate gradients. apply_a(x, y) computes y = A x;
/// apply_prec(r, z) computes z = B r with B symmetric positive definite.
/// Stops at the first iterate with ||r_k||_2 <= rel_tol * ||r_0||_2.
template <class ApplyA, class ApplyPrec>
SolveReport pcg(std::size_t n, ApplyA&& apply_a, ApplyPrec&& apply_prec, const double* b,
                double* x, double rel_tol, int max_iters) {
  using Vec = Eigen::VectorXd;
  Eigen::Map<Vec> xv(x, n);
  Eigen::Map<const Vec> bv(b, n);
  Vec r(n), z(n), p(n), q(n);

  SolveReport rep;
  apply_a(xv.data(), q.data());
  r = bv - q;
  const double r0 = r.norm();
  rep.residual_history.push_back(r0);
  if (r0 == 0.0) {
    rep.converged = true;
    rep.final_relative_residual = 0.0;
    return rep;
  }
  const double stop = rel_tol * r0;

  apply_prec(r.data(), z.data());
  p = z;
  double rz = r.dot(z);
  for (int k = 1; k <= max_iters; ++k) {
    apply_a(p.data(), q.data());
    const double pq = p.dot(q);
    const double alpha = rz / pq;
    xv += alpha * p;
    r -= alpha * q;
    const double rn = r.norm();
    rep.residual_history.push_back(rn);
    rep.iterations = k;
    if (rn <= stop) {
      rep.converged = true;
      break;
    }
    apply_prec(r.data(), z.data());
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.final_relative_residual = rep.residual_history.back() / r0;
  return rep;
}

}  // namespace igamg
