#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "igamg/rng.hpp"

namespace igamg {

struct EigEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of the SPD pencil (A, B): max over x of x'Ax / x'Bx,
/// via power iteration on B^{-1}A. apply_a(x, y): y = A x; solve_b(x, y):
/// y = B^{-1} x. The Rayleigh quotient needs w'Bw, obtained for free from
/// B w = z when w = B^{-1} z, so B itself is never applied.
template <class ApplyA, class SolveB>
EigEstimate pencil_lambda_max(std::size_t n, ApplyA&& apply_a, SolveB&& solve_b, double rel_tol,
                              int max_iters, std::uint64_t seed) {
  using Vec = Eigen::VectorXd;
  Vec v(n), z(n), w(n);
  fill_uniform_pm1(seed, v.data(), n);
  v.normalize();
  apply_a(v.data(), z.data());  // z = A v

  EigEstimate est;
  double lambda_prev = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    solve_b(z.data(), w.data());       // w = B^{-1} A v
    const double wz = w.dot(z);        // w' B w
    const double wn = w.norm();
    v = w / wn;
    apply_a(v.data(), z.data());       // A v, reused next iteration
    const double lambda = w.dot(z) * wn / wz;  // (w' A w) / (w' B w)
    est.value = lambda;
    est.iterations = k;
    if (k > 1 && std::abs(lambda - lambda_prev) <= rel_tol * std::abs(lambda)) {
      est.converged = true;
      break;
    }
    lambda_prev = lambda;
  }
  return est;
}

}  // namespace igamg
