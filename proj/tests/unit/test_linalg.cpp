#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "igamg/csr.hpp"
#include "igamg/eig.hpp"
#include "igamg/pcg.hpp"
#include "igamg/rng.hpp"
#include "igamg/tensor_ops.hpp"

using namespace igamg;

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

BandedSym random_banded_spd(int n, int bw, std::mt19937_64& rng) {
  BandedSym A(n, bw);
  for (int j = 0; j < n; ++j)
    for (int i = j; i <= std::min(n - 1, j + bw); ++i) A.at(i, j) = uniform_pm1(rng);
  for (int i = 0; i < n; ++i) A.at(i, i) = std::abs(A.at(i, i)) + 2.0 * (bw + 1);
  return A;
}

}  // namespace

TEST_CASE("seeded uniform fill is deterministic and in range", "[linalg]") {
  Eigen::VectorXd a(1000), b(1000);
  fill_uniform_pm1(42, a.data(), 1000);
  fill_uniform_pm1(42, b.data(), 1000);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.minCoeff() >= -1.0);
  CHECK(a.maxCoeff() < 1.0);
  fill_uniform_pm1(43, b.data(), 1000);
  CHECK((a - b).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("banded apply along each direction matches the dense Kronecker product", "[linalg]") {
  std::mt19937_64 rng(1234);
  const TensorShape s = shape3(5, 4, 3);
  const BandedSym F0 = random_banded_spd(5, 2, rng);
  const BandedSym F1 = random_banded_spd(4, 1, rng);
  const BandedSym F2 = random_banded_spd(3, 2, rng);
  Eigen::VectorXd x(s.total());
  fill_uniform_pm1(7, x.data(), s.total());

  const Eigen::MatrixXd I0 = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd K0 = kron(I2, kron(I1, F0.dense()));
  const Eigen::MatrixXd K1 = kron(I2, kron(F1.dense(), I0));
  const Eigen::MatrixXd K2 = kron(F2.dense(), kron(I1, I0));

  Eigen::VectorXd y(s.total());
  apply_banded_dir(F0, 0, s, x.data(), y.data());
  CHECK((y - K0 * x).lpNorm<Eigen::Infinity>() < 1e-13);
  apply_banded_dir(F1, 1, s, x.data(), y.data());
  CHECK((y - K1 * x).lpNorm<Eigen::Infinity>() < 1e-13);
  apply_banded_dir(F2, 2, s, x.data(), y.data());
  CHECK((y - K2 * x).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("banded direction solve inverts the direction apply", "[linalg]") {
  std::mt19937_64 rng(99);
  const TensorShape s = shape3(6, 5, 4);
  for (int dir = 0; dir < 3; ++dir) {
    const BandedSym F = random_banded_spd(s.n[dir], 2, rng);
    BandedChol C;
    REQUIRE(C.factor(F));
    Eigen::VectorXd x(s.total()), y(s.total());
    fill_uniform_pm1(11 + dir, x.data(), s.total());
    apply_banded_dir(F, dir, s, x.data(), y.data());
    solve_banded_dir(C, dir, s, y.data());
    CHECK((y - x).lpNorm<Eigen::Infinity>() < 1e-11);
  }
}

TEST_CASE("dense rectangular factor along a direction", "[linalg]") {
  std::mt19937_64 rng(5);
  const TensorShape sx = shape2(4, 6);
  Eigen::MatrixXd P(6, 3);  // maps length-3 to length-6 along dir 1
  for (int i = 0; i < P.size(); ++i) P.data()[i] = uniform_pm1(rng);
  const TensorShape sc = sx.with(1, 3);
  Eigen::VectorXd c(sc.total()), x(sx.total()), back(sc.total());
  fill_uniform_pm1(3, c.data(), sc.total());
  apply_dense_dir(P, false, 1, sc, c.data(), x.data());
  const Eigen::MatrixXd K = kron(P, Eigen::MatrixXd::Identity(4, 4));
  CHECK((x - K * c).lpNorm<Eigen::Infinity>() < 1e-13);
  apply_dense_dir(P, true, 1, sx, x.data(), back.data());
  CHECK((back - K.transpose() * x).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("csr from Kronecker terms: matvec matches dense", "[linalg]") {
  std::mt19937_64 rng(2024);
  const TensorShape s = shape2(6, 5);
  const BandedSym M0 = random_banded_spd(6, 2, rng);
  const BandedSym B0 = random_banded_spd(6, 2, rng);
  const BandedSym M1 = random_banded_spd(5, 2, rng);
  const BandedSym B1 = random_banded_spd(5, 2, rng);
  std::vector<KronTerm> terms(2);
  terms[0] = KronTerm{1.0, {&B0, &M1, nullptr}};
  terms[1] = KronTerm{2.5, {&M0, &B1, nullptr}};
  const CsrMatrix A = csr_from_kron(s, terms);
  const Eigen::MatrixXd D =
      kron(M1.dense(), B0.dense()) + 2.5 * kron(B1.dense(), M0.dense());
  Eigen::VectorXd x(s.total()), y(s.total());
  fill_uniform_pm1(17, x.data(), s.total());
  A.matvec(x.data(), y.data());
  CHECK((y - D * x).lpNorm<Eigen::Infinity>() < 1e-12);
  // sorted, duplicate-free columns
  for (int i = 0; i < A.n; ++i)
    for (std::int64_t k = A.rowptr[i] + 1; k < A.rowptr[i + 1]; ++k)
      CHECK(A.col[k] > A.col[k - 1]);
}

TEST_CASE("gauss-seidel sweeps: frozen 3x3 oracle and symmetric composition", "[linalg]") {
  CsrMatrix A;
  A.n = 3;
  A.rowptr = {0, 2, 5, 7};
  A.col = {0, 1, 0, 1, 2, 1, 2};
  A.val = {4, 1, 1, 3, 1, 1, 5};
  const double b[3] = {1, 2, 3};

  double x[3] = {0, 0, 0};
  A.gs_forward(b, x);
  CHECK(x[0] == Catch::Approx(0.25).margin(1e-15));
  CHECK(x[1] == Catch::Approx((2.0 - 0.25) / 3.0).margin(1e-15));
  CHECK(x[2] == Catch::Approx((3.0 - (2.0 - 0.25) / 3.0) / 5.0).margin(1e-15));

  // forward+backward from zero equals the symmetric Gauss-Seidel inverse
  // ((D+L) D^{-1} (D+L)^T)^{-1} b
  double xs[3] = {0, 0, 0};
  A.gs_forward(b, xs);
  A.gs_backward(b, xs);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
  D << 4, 1, 0, 1, 3, 1, 0, 1, 5;
  const Eigen::MatrixXd Dl = D.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd Dd = D.diagonal().asDiagonal();
  const Eigen::MatrixXd S = Dl * Dd.inverse() * Dl.transpose();
  const Eigen::Vector3d ref = S.ldlt().solve(Eigen::Vector3d(1, 2, 3));
  for (int i = 0; i < 3; ++i) CHECK(xs[i] == Catch::Approx(ref[i]).margin(1e-13));
}

TEST_CASE("pcg solves an SPD system and is deterministic", "[linalg]") {
  std::mt19937_64 rng(31);
  const int n = 40;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < R.size(); ++i) R.data()[i] = uniform_pm1(rng);
  const Eigen::MatrixXd A = R.transpose() * R + 0.5 * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  fill_uniform_pm1(77, b.data(), n);
  const auto apply_a = [&](const double* x, double* y) {
    Eigen::Map<const Eigen::VectorXd> xv(x, n);
    Eigen::Map<Eigen::VectorXd> yv(y, n);
    yv.noalias() = A * xv;
  };
  const auto ident = [&](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), x2 = Eigen::VectorXd::Zero(n);
  const SolveReport rep = pcg(n, apply_a, ident, b.data(), x.data(), 1e-12, 500);
  CHECK(rep.converged);
  CHECK(rep.iterations > 1);
  CHECK(rep.residual_history.size() == static_cast<std::size_t>(rep.iterations) + 1);
  const Eigen::VectorXd ref = A.ldlt().solve(b);
  CHECK((x - ref).lpNorm<Eigen::Infinity>() < 1e-8);
  const SolveReport rep2 = pcg(n, apply_a, ident, b.data(), x2.data(), 1e-12, 500);
  CHECK(rep2.iterations == rep.iterations);
  CHECK((x - x2).lpNorm<Eigen::Infinity>() == 0.0);

  // with a Jacobi preconditioner the iteration still converges to the answer
  Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  const auto jacobi = [&](const double* r, double* z) {
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  };
  x.setZero();
  const SolveReport rep3 = pcg(n, apply_a, jacobi, b.data(), x.data(), 1e-12, 500);
  CHECK(rep3.converged);
  CHECK((x - ref).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("pencil power iteration matches the dense generalized eigensolver", "[linalg]") {
  std::mt19937_64 rng(314);
  const int n = 30;
  Eigen::MatrixXd RA(n, n), RB(n, n);
  for (int i = 0; i < RA.size(); ++i) RA.data()[i] = uniform_pm1(rng);
  for (int i = 0; i < RB.size(); ++i) RB.data()[i] = uniform_pm1(rng);
  const Eigen::MatrixXd A = RA.transpose() * RA + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd B = RB.transpose() * RB + Eigen::MatrixXd::Identity(n, n);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, B);
  const double ref = ges.eigenvalues().maxCoeff();

  const Eigen::LLT<Eigen::MatrixXd> lltB(B);
  const auto apply_a = [&](const double* x, double* y) {
    Eigen::Map<const Eigen::VectorXd> xv(x, n);
    Eigen::Map<Eigen::VectorXd> yv(y, n);
    yv.noalias() = A * xv;
  };
  const auto solve_b = [&](const double* x, double* y) {
    Eigen::Map<const Eigen::VectorXd> xv(x, n);
    Eigen::Map<Eigen::VectorXd> yv(y, n);
    yv = lltB.solve(xv);
  };
  const EigEstimate est = pencil_lambda_max(n, apply_a, solve_b, 1e-9, 2000, 5);
  CHECK(est.converged);
  CHECK(est.value == Catch::Approx(ref).epsilon(1e-5));
}
