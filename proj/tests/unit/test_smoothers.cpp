#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "igamg/assembly.hpp"
#include "igamg/eig.hpp"
#include "igamg/grid.hpp"
#include "igamg/rng.hpp"
#include "igamg/smoothers.hpp"

using namespace igamg;

namespace {

TensorSpace small_space(int degree, int levels, int d) {
  Breakpoints b = default_coarse_grid();
  for (int l = 0; l < levels; ++l) b = refine_uniform(b);
  return make_tensor_space(d, build_univariate_space(b, degree));
}

Eigen::MatrixXd kron2(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A0) {
  // tensor layout: direction 0 fastest
  return detail::kron_dense(A1, A0);
}

// dense reference of the full subspace-corrected correction operator
Eigen::MatrixXd scms_reference(const TensorSpace& sp, double sigma, double beta) {
  REQUIRE(sp.d == 2);
  const DirectionSplit& S0d = sp.dir[0]->split;
  const DirectionSplit& S1d = sp.dir[1]->split;
  const Eigen::MatrixXd P0a = S0d.s0_dense(), P1a = S0d.P1;
  const Eigen::MatrixXd P0b = S1d.s0_dense(), P1b = S1d.P1;
  const Eigen::MatrixXd M0a = S0d.M0.dense(), M0b = S1d.M0.dense();

  const std::size_t n = sp.dim();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);

  // alpha = (0,0)
  {
    const Eigen::MatrixXd P = kron2(P0b, P0a);
    const Eigen::MatrixXd L = (2.0 * sigma + beta) * kron2(M0b, M0a);
    C += P * L.inverse() * P.transpose();
  }
  // alpha = (1,0): direction 0 in S1
  if (S0d.n1 > 0) {
    const Eigen::MatrixXd P = kron2(P0b, P1a);
    const Eigen::MatrixXd D = S0d.B1 + (sigma + beta) * S0d.M1;
    const Eigen::MatrixXd L = kron2(M0b, D);
    C += P * L.inverse() * P.transpose();
  }
  // alpha = (0,1): direction 1 in S1
  if (S1d.n1 > 0) {
    const Eigen::MatrixXd P = kron2(P1b, P0a);
    const Eigen::MatrixXd D = S1d.B1 + (sigma + beta) * S1d.M1;
    const Eigen::MatrixXd L = kron2(D, M0a);
    C += P * L.inverse() * P.transpose();
  }
  // alpha = (1,1)
  if (S0d.n1 > 0 && S1d.n1 > 0) {
    const Eigen::MatrixXd P = kron2(P1b, P1a);
    const Eigen::MatrixXd L = kron2(S1d.M1, S0d.B1) + kron2(S1d.B1, S0d.M1) +
                              beta * kron2(S1d.M1, S0d.M1);
    C += P * L.inverse() * P.transpose();
  }
  return C;
}

Eigen::MatrixXd materialize_correction(const SubspaceMassSmoother& sm) {
  const std::size_t n = sm.size();
  Eigen::MatrixXd C(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), z(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    sm.solve_l(e.data(), z.data());
    C.col(j) = z;
    e[j] = 0.0;
  }
  return C;
}

// error propagation matrix of one smoothing step for the system A
Eigen::MatrixXd propagation_matrix(const Smoother& sm, std::size_t n) {
  Eigen::MatrixXd E(n, n);
  Eigen::VectorXd x(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < n; ++j) {
    x.setZero();
    x[j] = 1.0;
    sm.smooth(b.data(), x.data());
    E.col(j) = x;
  }
  return E;
}

}  // namespace

TEST_CASE("scms application matches the materialized operator", "[smoothers]") {
  for (int p : {3, 5}) {
    const TensorSpace sp = small_space(p, 1, 2);
    const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
    const double beta = 1.0;
    const SubspaceMassSmoother sm(sp, sigma, beta, 1.0);
    const Eigen::MatrixXd C = materialize_correction(sm);
    const Eigen::MatrixXd Cref = scms_reference(sp, sigma, beta);
    REQUIRE((C - Cref).norm() <= 1e-11 * Cref.norm());
  }
}

TEST_CASE("scms correction is symmetric positive definite", "[smoothers]") {
  const TensorSpace sp = small_space(4, 1, 2);
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  const SubspaceMassSmoother sm(sp, sigma, 1.0, 1.0);
  const std::size_t n = sm.size();
  Eigen::VectorXd r(n), s(n), cr(n), cs(n);
  fill_uniform_pm1(101, r.data(), n);
  fill_uniform_pm1(103, s.data(), n);
  sm.solve_l(r.data(), cr.data());
  sm.solve_l(s.data(), cs.data());
  const double a = s.dot(cr), b = r.dot(cs);
  REQUIRE(std::abs(a - b) <= 1e-10 * std::abs(a));
  REQUIRE(r.dot(cr) > 0.0);
  REQUIRE(s.dot(cs) > 0.0);
}

TEST_CASE("degree two reduces to the pure mass smoother", "[smoothers]") {
  const TensorSpace sp = small_space(2, 1, 2);
  REQUIRE(sp.dir[0]->split.n1 == 0);
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  const double beta = 2.0;
  const SubspaceMassSmoother sm(sp, sigma, beta, 1.0);
  const Eigen::MatrixXd C = materialize_correction(sm);

  const DirectionSplit& S = sp.dir[0]->split;
  const Eigen::MatrixXd P = kron2(sp.dir[1]->split.s0_dense(), S.s0_dense());
  const Eigen::MatrixXd M0 = kron2(sp.dir[1]->split.M0.dense(), S.M0.dense());
  const Eigen::MatrixXd Cref = P * M0.inverse() * P.transpose() / (2.0 * sigma + beta);
  REQUIRE((C - Cref).norm() <= 1e-11 * Cref.norm());
}

TEST_CASE("scms zero-start fast path is bit-identical", "[smoothers]") {
  const TensorSpace sp = small_space(4, 1, 2);
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  auto scms = std::make_shared<SubspaceMassSmoother>(sp, sigma, 1.0, 0.8);
  auto op = std::make_shared<KronOperator>(parametric_operator(sp, 1.0));
  const ApplyFn apply = [op](const double* x, double* y) { op->apply(x, y); };
  const ScmsSmoother sm(scms, apply);

  const std::size_t n = sp.dim();
  Eigen::VectorXd b(n), x1(n), x2(n);
  fill_uniform_pm1(5, b.data(), n);
  x1.setZero();
  sm.smooth(b.data(), x1.data());
  sm.smooth_zero(n, b.data(), x2.data());
  for (std::size_t i = 0; i < n; ++i) REQUIRE(x1[i] == x2[i]);
}

TEST_CASE("every smoother step is self-adjoint in the energy inner product",
          "[smoothers]") {
  const TensorSpace sp = small_space(3, 1, 2);
  const double beta = 1.0;
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  auto acsr = std::make_shared<CsrMatrix>(parametric_csr(sp, beta));
  auto scms = std::make_shared<SubspaceMassSmoother>(sp, sigma, beta, 0.5);
  const ApplyFn apply = [acsr](const double* x, double* y) { acsr->matvec(x, y); };
  const Eigen::MatrixXd A = csr_to_dense(*acsr);
  const std::size_t n = sp.dim();

  const SgsSmoother sgs(acsr);
  const ScmsSmoother scm(scms, apply);
  const HybridSmoother hyb(acsr, scms);
  for (const Smoother* sm : {static_cast<const Smoother*>(&sgs),
                             static_cast<const Smoother*>(&scm),
                             static_cast<const Smoother*>(&hyb)}) {
    const Eigen::MatrixXd E = propagation_matrix(*sm, n);
    const Eigen::MatrixXd AE = A * E;
    REQUIRE((AE - AE.transpose()).norm() <= 1e-9 * AE.norm());
    // convergent smoothing: spectral radius of the propagation below one
    const Eigen::VectorXcd ev = E.eigenvalues();
    REQUIRE(ev.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("hybrid with zero damping degenerates to symmetric gauss-seidel",
          "[smoothers]") {
  const TensorSpace sp = small_space(3, 1, 2);
  auto acsr = std::make_shared<CsrMatrix>(parametric_csr(sp, 1.0));
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  auto scms = std::make_shared<SubspaceMassSmoother>(sp, sigma, 1.0, 0.0);
  const HybridSmoother hyb(acsr, scms);
  const SgsSmoother sgs(acsr);

  const std::size_t n = sp.dim();
  Eigen::VectorXd b(n), x1(n), x2(n);
  fill_uniform_pm1(31, b.data(), n);
  fill_uniform_pm1(37, x1.data(), n);
  x2 = x1;
  hyb.smooth(b.data(), x1.data());
  sgs.smooth(b.data(), x2.data());
  for (std::size_t i = 0; i < n; ++i) REQUIRE(x1[i] == x2[i]);
}

TEST_CASE("damped smoother iteration contracts with measured step size",
          "[smoothers]") {
  const TensorSpace sp = small_space(3, 2, 2);
  const double beta = 1.0;
  const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
  const SubspaceMassSmoother sm(sp, sigma, beta, 1.0);
  const KronOperator op = parametric_operator(sp, beta);
  const std::size_t n = sp.dim();

  const EigEstimate lam = pencil_lambda_max(
      n, [&](const double* x, double* y) { op.apply(x, y); },
      [&](const double* r, double* z) { sm.solve_l(r, z); }, 1e-7, 2000, 71);
  REQUIRE(lam.converged);
  REQUIRE(lam.value > 0.0);

  const double tau = 0.9 / lam.value;
  Eigen::VectorXd e(n), ae(n), c(n);
  fill_uniform_pm1(53, e.data(), n);
  const auto anorm = [&]() {
    op.apply(e.data(), ae.data());
    return std::sqrt(e.dot(ae));
  };
  const double q0 = anorm();
  for (int k = 0; k < 30; ++k) {
    op.apply(e.data(), ae.data());
    sm.solve_l(ae.data(), c.data());
    e -= tau * c;
  }
  const double q1 = anorm();
  REQUIRE(q1 < q0);
  const double rho = std::pow(q1 / q0, 1.0 / 30.0);
  CAPTURE(rho);
  REQUIRE(rho < 1.0);
}
