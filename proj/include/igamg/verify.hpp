#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "igamg/assembly.hpp"
#include "igamg/eig.hpp"
#include "igamg/grid.hpp"
#include "igamg/multigrid.hpp"
#include "igamg/rng.hpp"
#include "igamg/smoothers.hpp"
#include "igamg/solver.hpp"
#include "igamg/tensor_space.hpp"
#include "igamg/transfer.hpp"
#include "igamg/univariate_assembly.hpp"

namespace igamg {

/// One measured quantity compared against a bound.
struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation;  // "<=", "<", ">=", "==", "reported"
  bool ok = true;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  int violations() const {
    int v = 0;
    for (const auto& c : checks) v += c.ok ? 0 : 1;
    return v;
  }
};

namespace vdetail {

inline Breakpoints grid_at_level(bool uniform, int level) {
  Breakpoints b = uniform ? uniform_coarse_grid() : default_coarse_grid();
  for (int l = 0; l < level; ++l) b = refine_uniform(b);
  return b;
}

/// Dense Kronecker product with the library's layout: the direction-0 factor
/// varies fastest, so the dense equivalent of {f0, f1} is kron(f1, f0).
inline Eigen::MatrixXd kron2(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A0) {
  Eigen::MatrixXd K(A1.rows() * A0.rows(), A1.cols() * A0.cols());
  for (Eigen::Index i = 0; i < A1.rows(); ++i)
    for (Eigen::Index j = 0; j < A1.cols(); ++j)
      K.block(i * A0.rows(), j * A0.cols(), A0.rows(), A0.cols()) = A1(i, j) * A0;
  return K;
}

/// Evaluate a tensor spline with homogeneous-boundary (reduced) coefficients.
inline double eval_reduced(const TensorSpace& sp, const double* c, const double* xi) {
  std::array<BasisDers, 3> bd;
  for (int k = 0; k < sp.d; ++k) bd[k] = eval_basis(sp.dir[k]->kv, xi[k], 0);
  const TensorShape s = sp.shape();
  int w[3] = {1, 1, 1};
  int window = 1;
  for (int k = 0; k < sp.d; ++k) {
    w[k] = sp.dir[k]->p + 1;
    window *= w[k];
  }
  double val = 0.0;
  for (int t = 0; t < window; ++t) {
    int rem = t, a[3] = {0, 0, 0};
    for (int k = 0; k < sp.d; ++k) {
      a[k] = rem % w[k];
      rem /= w[k];
    }
    double phi = 1.0;
    std::size_t flat = 0, stride = 1;
    bool inside = true;
    for (int k = 0; k < sp.d; ++k) {
      const int r = bd[k].first_index + a[k] - 1;  // boundary functions removed
      if (r < 0 || r >= s.n[k]) {
        inside = false;
        break;
      }
      phi *= bd[k].ders(0, a[k]);
      flat += stride * static_cast<std::size_t>(r);
      stride *= static_cast<std::size_t>(s.n[k]);
    }
    if (inside) val += phi * c[flat];
  }
  return val;
}

inline Eigen::MatrixXd dense_from_terms(const TensorSpace& sp,
                                        const std::vector<KronTerm>& terms) {
  return csr_to_dense(csr_from_kron(sp.shape(), terms));
}

/// Materialize the subspace-corrected correction operator C = L^{-1} column
/// by column through the production apply path.
inline Eigen::MatrixXd materialize_scms(const SubspaceMassSmoother& sm, std::size_t n) {
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

/// First-principles dense assembly of the same correction operator,
/// C = sum_alpha P_alpha D_alpha^{-1} P_alpha^T, for d = 2.
inline Eigen::MatrixXd reference_scms_2d(const TensorSpace& sp, double sigma, double beta) {
  const DirectionSplit& S0 = sp.dir[0]->split;
  const DirectionSplit& S1 = sp.dir[1]->split;
  const Eigen::MatrixXd P0a = S0.s0_dense(), P0b = S1.s0_dense();
  const Eigen::MatrixXd M0a = S0.M0.dense(), M0b = S1.M0.dense();
  const std::size_t n = sp.dim();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int mask = 0; mask < 4; ++mask) {
    const bool a1 = mask & 1, b1 = mask & 2;  // bit set: direction lies in S^1
    const Eigen::MatrixXd& Pa = a1 ? S0.P1 : P0a;
    const Eigen::MatrixXd& Pb = b1 ? S1.P1 : P0b;
    if (Pa.cols() == 0 || Pb.cols() == 0) continue;
    const Eigen::MatrixXd Ma = a1 ? S0.M1 : M0a;
    const Eigen::MatrixXd Mb = b1 ? S1.M1 : M0b;
    const int z = (a1 ? 0 : 1) + (b1 ? 0 : 1);
    Eigen::MatrixXd D = (z * sigma + beta) * kron2(Mb, Ma);
    if (a1) D += kron2(Mb, S0.B1);
    if (b1) D += kron2(S1.B1, Ma);
    const Eigen::MatrixXd P = kron2(Pb, Pa);
    C += P * D.llt().solve(Eigen::MatrixXd::Identity(D.rows(), D.cols())) * P.transpose();
  }
  return C;
}

inline std::string cfg_tag(bool uniform, int p, int level) {
  return std::string(uniform ? "uniform" : "paper") + " grid, p=" + std::to_string(p) +
         ", level=" + std::to_string(level);
}

}  // namespace vdetail

/// L2-projection error bound for the boundary-compatible subspace:
/// || u - Q0 u || <= (h_max^2 / pi^2) || u'' || for smooth u with u(0)=u(1)=0.
inline VerifyReport verify_approximation() {
  VerifyReport rep;
  rep.suite = "approximation";
  struct Probe {
    std::string label;
    std::function<double(double)> u, upp;
  };
  const double pi = M_PI;
  std::vector<Probe> probes = {
      {"sin(pi x)", [pi](double x) { return std::sin(pi * x); },
       [pi](double x) { return -pi * pi * std::sin(pi * x); }},
      {"x(1-x)sin(3pi x)",
       [pi](double x) { return x * (1.0 - x) * std::sin(3.0 * pi * x); },
       [pi](double x) {
         return -2.0 * std::sin(3.0 * pi * x) +
                6.0 * pi * (1.0 - 2.0 * x) * std::cos(3.0 * pi * x) -
                9.0 * pi * pi * x * (1.0 - x) * std::sin(3.0 * pi * x);
       }}};
  Breakpoints fine(257);
  for (int i = 0; i <= 256; ++i) fine[i] = static_cast<double>(i) / 256.0;
  for (const Probe& pr : probes) {
    const double upp_norm = l2_norm(fine, pr.upp, 8);
    for (int p : {3, 4, 5}) {
      for (int level : {1, 2, 3}) {
        const Breakpoints br = vdetail::grid_at_level(false, level);
        auto u = build_univariate_space(br, p);
        const DirectionSplit& S = u->split;
        const Eigen::MatrixXd P0 = S.s0_dense();
        const Eigen::VectorXd mom = assemble_moments(u->kv, pr.u, p + 6);
        Eigen::VectorXd b0 = P0.transpose() * mom.segment(1, u->n);
        S.M0_chol.solve(b0.data());
        const Eigen::VectorXd c_red = P0 * b0;
        Eigen::VectorXd c_full = Eigen::VectorXd::Zero(u->n_full);
        c_full.segment(1, u->n) = c_red;
        const double err = l2_norm(
            br,
            [&](double x) { return pr.u(x) - eval_spline(u->kv, c_full, x); },
            p + 8);
        VerifyCheck c;
        c.name = "||u - Q0 u|| [u=" + pr.label + ", p=" + std::to_string(p) +
                 ", level=" + std::to_string(level) + "]";
        c.measured = err;
        c.bound = u->h_max * u->h_max / (pi * pi) * upp_norm + 1e-10;
        c.relation = "<=";
        c.ok = c.measured <= c.bound;
        rep.checks.push_back(c);
      }
    }
  }

  // Second-derivative amplification of the projection, ||(Q0 u)''|| / ||u''||.
  // The sharp constant is unknown, so the value is reported; asserted are
  // finiteness and stabilization under refinement: the level-2 -> level-3
  // change may not exceed the level-1 -> level-2 change (5% floor).
  for (const Probe& pr : probes) {
    const double upp_norm = l2_norm(fine, pr.upp, 8);
    for (int p : {3, 4, 5}) {
      double amp[3] = {0.0, 0.0, 0.0};
      for (int level : {1, 2, 3}) {
        const Breakpoints br = vdetail::grid_at_level(false, level);
        auto u = build_univariate_space(br, p);
        const DirectionSplit& S = u->split;
        const Eigen::MatrixXd P0 = S.s0_dense();
        const Eigen::VectorXd mom = assemble_moments(u->kv, pr.u, p + 6);
        Eigen::VectorXd b0 = P0.transpose() * mom.segment(1, u->n);
        S.M0_chol.solve(b0.data());
        const Eigen::MatrixXd B0 = P0.transpose() * u->B.dense() * P0;
        amp[level - 1] = std::sqrt(std::max(0.0, b0.dot(B0 * b0))) / upp_norm;
      }
      const std::string tag = " [u=" + pr.label + ", p=" + std::to_string(p) + "]";
      VerifyCheck val;
      val.name = "H2 amplification ||(Q0 u)''||/||u''|| at level 3" + tag;
      val.measured = amp[2];
      val.bound = 0.0;
      val.relation = "reported";
      val.ok = std::isfinite(amp[0]) && std::isfinite(amp[1]) && std::isfinite(amp[2]);
      rep.checks.push_back(val);
      VerifyCheck st;
      st.name = "H2 amplification stabilization |c3-c2| <= max(|c2-c1|, 0.05 c2)" + tag;
      st.measured = std::abs(amp[2] - amp[1]);
      st.bound = std::max(std::abs(amp[1] - amp[0]), 0.05 * amp[1]);
      st.relation = "<=";
      st.ok = st.measured <= st.bound;
      rep.checks.push_back(st);
    }
  }
  return rep;
}

/// Inverse-estimate constant of the boundary-compatible subspace:
/// lambda_max(B0, M0) * h_min^4 <= 144 across degrees and grids.
inline VerifyReport verify_inverse() {
  VerifyReport rep;
  rep.suite = "inverse";
  struct GridCase {
    bool uniform;
    int level;
  };
  for (const GridCase g : {GridCase{false, 2}, GridCase{false, 3}, GridCase{true, 2}}) {
    for (int p = 2; p <= 6; ++p) {
      const Breakpoints br = vdetail::grid_at_level(g.uniform, g.level);
      auto u = build_univariate_space(br, p);
      const Eigen::MatrixXd P0 = u->split.s0_dense();
      const Eigen::MatrixXd M0 = P0.transpose() * u->M.dense() * P0;
      const Eigen::MatrixXd B0 = P0.transpose() * u->B.dense() * P0;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B0, M0);
      VerifyCheck c;
      c.name = "lam_max(B0,M0)*h_min^4 [" + vdetail::cfg_tag(g.uniform, p, g.level) + "]";
      c.measured = es.eigenvalues().maxCoeff() * std::pow(u->h_min, 4.0);
      c.bound = 144.0;
      c.relation = "<=";
      c.ok = c.measured <= c.bound;
      rep.checks.push_back(c);
    }
  }
  return rep;
}

/// Spectral equivalence of the full fourth-order tensor form with its
/// separable part (generalized eigenvalues in [1, d]), plus structural
/// transfer checks: Galerkin consistency and pointwise prolongation exactness.
inline VerifyReport verify_equivalence() {
  VerifyReport rep;
  rep.suite = "equivalence";
  for (int d : {1, 2}) {
    for (int p : {2, 3}) {
      const Breakpoints br = vdetail::grid_at_level(false, 1);
      TensorSpace sp = make_tensor_space(d, build_univariate_space(br, p));
      const BandedSym *M = &sp.dir[0]->M, *B = &sp.dir[0]->B, *G = &sp.dir[0]->G;
      std::vector<KronTerm> sep, full;
      if (d == 1) {
        sep.push_back({1.0, {B, nullptr, nullptr}});
        full = sep;
      } else {
        sep.push_back({1.0, {B, M, nullptr}});
        sep.push_back({1.0, {M, B, nullptr}});
        full = sep;
        full.push_back({2.0, {G, G, nullptr}});
      }
      const Eigen::MatrixXd Bsep = vdetail::dense_from_terms(sp, sep);
      const Eigen::MatrixXd Bfull = vdetail::dense_from_terms(sp, full);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Bfull, Bsep);
      VerifyCheck lo, hi;
      lo.name = "min gen-eig(full,separable) [d=" + std::to_string(d) +
                ", p=" + std::to_string(p) + "]";
      lo.measured = es.eigenvalues().minCoeff();
      lo.bound = 1.0 - 1e-9;
      lo.relation = ">=";
      lo.ok = lo.measured >= lo.bound;
      hi.name = "max gen-eig(full,separable) [d=" + std::to_string(d) +
                ", p=" + std::to_string(p) + "]";
      hi.measured = es.eigenvalues().maxCoeff();
      hi.bound = static_cast<double>(d) + 1e-9;
      hi.relation = "<=";
      hi.ok = hi.measured <= hi.bound;
      rep.checks.push_back(lo);
      rep.checks.push_back(hi);
    }
  }

  // Transfer structure on a nested pair (2D, p=3).
  {
    TensorSpace coarse =
        make_tensor_space(2, build_univariate_space(vdetail::grid_at_level(false, 1), 3));
    TensorSpace finey =
        make_tensor_space(2, build_univariate_space(vdetail::grid_at_level(false, 2), 3));
    const TensorTransfer T = make_transfer(coarse, finey);
    const Eigen::MatrixXd E = transfer_dense(T);
    const Eigen::MatrixXd Af = csr_to_dense(parametric_csr(finey, 1.0));
    const Eigen::MatrixXd Ac = csr_to_dense(parametric_csr(coarse, 1.0));
    const Eigen::MatrixXd G = E.transpose() * Af * E;
    VerifyCheck gal;
    gal.name = "Galerkin consistency |E' A_f E - A_c| / |A_c| [2D, p=3]";
    gal.measured = (G - Ac).cwiseAbs().maxCoeff() / Ac.cwiseAbs().maxCoeff();
    gal.bound = 1e-10;
    gal.relation = "<=";
    gal.ok = gal.measured <= gal.bound;
    rep.checks.push_back(gal);

    Eigen::VectorXd xc(coarse.dim()), xf(finey.dim());
    fill_uniform_pm1(7, xc.data(), coarse.dim());
    T.prolong(xc.data(), xf.data());
    std::mt19937_64 g(11);
    double maxdiff = 0.0, scale = 1.0;
    for (int s = 0; s < 40; ++s) {
      double xi[2];
      for (double& v : xi) v = 0.5 * (uniform_pm1(g) + 1.0);
      const double vc = vdetail::eval_reduced(coarse, xc.data(), xi);
      const double vf = vdetail::eval_reduced(finey, xf.data(), xi);
      maxdiff = std::max(maxdiff, std::abs(vc - vf));
      scale = std::max(scale, std::abs(vc));
    }
    VerifyCheck pro;
    pro.name = "prolongation pointwise exactness [2D, p=3, 40 samples]";
    pro.measured = maxdiff / scale;
    pro.bound = 1e-12;
    pro.relation = "<=";
    pro.ok = pro.measured <= pro.bound;
    rep.checks.push_back(pro);
  }

  // Equivalence of the parametric operators with their mapped counterparts on
  // a genuinely curved domain.  The constants depend on the geometry and are
  // reported (asserted finite and positive), one pencil per level so their
  // level-stability is visible in the report.
  {
    auto geo = make_geometry("quarter-annulus-2d");
    ManufacturedProblem prob;
    prob.d = 2;
    for (int level : {1, 2}) {
      TensorSpace sp = make_tensor_space(
          2, build_univariate_space(vdetail::grid_at_level(false, level), 3));
      PhysicalPieces pieces = assemble_physical(sp, *geo, prob);
      const Eigen::MatrixXd Mphys = csr_to_dense(pieces.M);
      const Eigen::MatrixXd Bphys = csr_to_dense(pieces.B);
      const Eigen::MatrixXd Ahat1 = csr_to_dense(parametric_csr(sp, 1.0));
      const Eigen::MatrixXd Bhat = csr_to_dense(parametric_csr(sp, 0.0));
      const Eigen::MatrixXd Mhat = Ahat1 - Bhat;
      struct Pencil {
        const char* label;
        const Eigen::MatrixXd *hat, *phys;
      };
      for (const Pencil pc : {Pencil{"mass", &Mhat, &Mphys}, Pencil{"biharmonic", &Bhat, &Bphys}}) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(*pc.hat, *pc.phys);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        VerifyCheck c;
        c.name = std::string("mapped-domain equivalence gen-eig range of (") + pc.label +
                 "-hat, " + pc.label + ") = [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "] [annulus, p=3, level=" + std::to_string(level) + "]";
        c.measured = hi / lo;  // condition of the equivalence
        c.bound = 0.0;
        c.relation = "reported";
        c.ok = std::isfinite(lo) && std::isfinite(hi) && lo > 0.0;
        rep.checks.push_back(c);
      }
    }
  }
  return rep;
}

/// Smoother-condition checks for the subspace-corrected mass smoother with
/// the theory weight sigma0 = 144: admissibility of the undamped step,
/// stability of the measured equivalence constant C_S, equivalence of the
/// applied operator with its first-principles dense form, and linearity of
/// the materialized L in beta.
inline VerifyReport verify_smoother() {
  VerifyReport rep;
  rep.suite = "smoother";
  const double beta = 1.0;
  std::vector<double> cs_values;
  for (int p : {3, 4, 5}) {
    for (int level : {1, 2}) {
      TensorSpace sp = make_tensor_space(
          2, build_univariate_space(vdetail::grid_at_level(false, level), p));
      const double h4 = std::pow(sp.h_min(), -4.0);
      const double sigma = 144.0 * h4;
      SubspaceMassSmoother sm(sp, sigma, beta, 1.0);
      const std::size_t n = sp.dim();
      const Eigen::MatrixXd C = vdetail::materialize_scms(sm, n);
      const Eigen::MatrixXd L = C.llt().solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::MatrixXd A = csr_to_dense(parametric_csr(sp, beta));
      const Eigen::MatrixXd Bhat = csr_to_dense(parametric_csr(sp, 0.0));
      const Eigen::MatrixXd Mhat = A - Bhat;  // = beta * mass tensor, beta = 1
      const Eigen::MatrixXd X = Bhat + (beta + h4) * Mhat;

      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> esla(A, L);
      const double lamLA = esla.eigenvalues().maxCoeff();
      VerifyCheck adm;
      adm.name = "lam_max(L^-1 A), undamped-step admissibility [" +
                 vdetail::cfg_tag(false, p, level) + "]";
      adm.measured = lamLA;
      adm.bound = 2.0;
      adm.relation = "<";
      adm.ok = adm.measured < adm.bound;
      rep.checks.push_back(adm);

      const double tau0 = 1.0 / lamLA;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> esxa(A, X);
      const double lam_l = esxa.eigenvalues().maxCoeff();
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> esxl(L, X);
      const double cs = esxl.eigenvalues().maxCoeff() / (tau0 * lam_l);
      cs_values.push_back(cs);
      VerifyCheck csr;
      csr.name = "C_S = lam_max(X^-1 L)/(tau0 lam) [" + vdetail::cfg_tag(false, p, level) + "]";
      csr.measured = cs;
      csr.bound = 0.0;
      csr.relation = "reported";
      csr.ok = true;
      rep.checks.push_back(csr);
    }
  }
  {
    double lo = cs_values.front(), hi = cs_values.front();
    for (double v : cs_values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    VerifyCheck stab;
    stab.name = "C_S stability max/min over p in {3,4,5}, levels {1,2}";
    stab.measured = hi / lo;
    stab.bound = 1.5;
    stab.relation = "<=";
    stab.ok = stab.measured <= stab.bound;
    rep.checks.push_back(stab);
  }

  // Applied-vs-materialized equivalence on a tiny instance.
  {
    TensorSpace sp =
        make_tensor_space(2, build_univariate_space(vdetail::grid_at_level(false, 1), 3));
    const double sigma = 144.0 * std::pow(sp.h_min(), -4.0);
    SubspaceMassSmoother sm(sp, sigma, beta, 1.0);
    const Eigen::MatrixXd C = vdetail::materialize_scms(sm, sp.dim());
    const Eigen::MatrixXd Cref = vdetail::reference_scms_2d(sp, sigma, beta);
    VerifyCheck eq;
    eq.name = "applied vs dense-assembled correction, relative [2D, p=3, level=1]";
    eq.measured = (C - Cref).cwiseAbs().maxCoeff() / Cref.cwiseAbs().maxCoeff();
    eq.bound = 1e-11;
    eq.relation = "<=";
    eq.ok = eq.measured <= eq.bound;
    rep.checks.push_back(eq);

    // The construction depends on beta only through the +beta*mass term:
    // the production path at an extreme beta must match the dense form.
    SubspaceMassSmoother smb(sp, sigma, 1e7, 1.0);
    const Eigen::MatrixXd Cb = vdetail::materialize_scms(smb, sp.dim());
    const Eigen::MatrixXd Cbref = vdetail::reference_scms_2d(sp, sigma, 1e7);
    VerifyCheck eqb;
    eqb.name = "applied vs dense-assembled correction at beta=1e7, relative";
    eqb.measured = (Cb - Cbref).cwiseAbs().maxCoeff() / Cbref.cwiseAbs().maxCoeff();
    eqb.bound = 1e-11;
    eqb.relation = "<=";
    eqb.ok = eqb.measured <= eqb.bound;
    rep.checks.push_back(eqb);

    // L(beta) has equal increments in beta: L(2) - L(1) == L(1) - L(0).
    // The increments sit ~1e6 below the scale of L itself, so materializing
    // through an inverse leaves round-off near 1e-7 of the increment.
    const std::size_t n = sp.dim();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    auto Lof = [&](double b) {
      SubspaceMassSmoother s(sp, sigma, b, 1.0);
      return Eigen::MatrixXd(vdetail::materialize_scms(s, n).llt().solve(I));
    };
    const Eigen::MatrixXd L0 = Lof(0.0), L1 = Lof(1.0), L2 = Lof(2.0);
    VerifyCheck lin;
    lin.name = "beta-linearity of L: |(L2-L1)-(L1-L0)| / |L1-L0|";
    lin.measured = ((L2 - L1) - (L1 - L0)).cwiseAbs().maxCoeff() /
                   (L1 - L0).cwiseAbs().maxCoeff();
    lin.bound = 1e-6;
    lin.relation = "<=";
    lin.ok = lin.measured <= lin.bound;
    rep.checks.push_back(lin);
  }

  // Stability of the direct-sum splitting underlying the smoother: the unique
  // decomposition u = sum_alpha u_alpha over the per-direction subspace
  // products satisfies sum_alpha ||u_alpha||^2 <= c ||u||^2 in the separable
  // fourth-order norm.  The sharp constant is geometry-free but unknown; the
  // sampled constant is asserted below an empirical 10x band.
  for (int p : {3, 4, 5, 6}) {
    TensorSpace sp =
        make_tensor_space(2, build_univariate_space(vdetail::grid_at_level(false, 1), p));
    const DirectionSplit& Sa = sp.dir[0]->split;
    const DirectionSplit& Sb = sp.dir[1]->split;
    const Eigen::MatrixXd Bd = sp.dir[0]->B.dense();
    const Eigen::MatrixXd Md = sp.dir[0]->M.dense();
    const Eigen::MatrixXd Bbar = vdetail::kron2(Md, Bd) + vdetail::kron2(Bd, Md);
    const std::size_t n = sp.dim();

    std::vector<Eigen::MatrixXd> P;  // subspace embeddings, S0/S1 per direction
    for (int mask = 0; mask < 4; ++mask) {
      const Eigen::MatrixXd& Pa = (mask & 1) ? Sa.P1 : Sa.s0_dense();
      const Eigen::MatrixXd& Pb = (mask & 2) ? Sb.P1 : Sb.s0_dense();
      if (Pa.cols() == 0 || Pb.cols() == 0) continue;
      P.push_back(vdetail::kron2(Pb, Pa));
    }
    Eigen::MatrixXd T(n, n);
    Eigen::Index col = 0;
    for (const Eigen::MatrixXd& Pk : P) {
      T.middleCols(col, Pk.cols()) = Pk;
      col += Pk.cols();
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> Tlu(T);
    std::mt19937_64 g(23);
    double worst = 0.0;
    Eigen::VectorXd x(n);
    for (int s = 0; s < 25; ++s) {
      for (std::size_t i = 0; i < n; ++i) x[i] = uniform_pm1(g);
      const Eigen::VectorXd y = Tlu.solve(x);
      double num = 0.0;
      Eigen::Index off = 0;
      for (const Eigen::MatrixXd& Pk : P) {
        const Eigen::VectorXd u_a = Pk * y.segment(off, Pk.cols());
        num += u_a.dot(Bbar * u_a);
        off += Pk.cols();
      }
      worst = std::max(worst, num / x.dot(Bbar * x));
    }
    VerifyCheck sc;
    sc.name = "splitting stability sum_a ||u_a||^2 / ||u||^2 in the separable norm [2D, p=" +
              std::to_string(p) + ", level=1, 25 samples]";
    sc.measured = worst;
    sc.bound = 10.0;
    sc.relation = "<=";
    sc.ok = sc.measured <= sc.bound;
    rep.checks.push_back(sc);
  }
  return rep;
}

/// Eigenvalue bound lam_max(X^-1 A) < 1 with X = A + h_min^-4 * mass (checked
/// on dense instances; the difference X - A is the scaled mass matrix, which
/// is SPD, so the bound holds on every level by construction), plus V-cycle
/// fixed-point and determinism checks.
inline VerifyReport verify_eigen() {
  VerifyReport rep;
  rep.suite = "eigen";
  for (bool uniform : {false, true}) {
    for (int p : {3, 4, 5}) {
      for (int level = 0; level <= 3; ++level) {
        TensorSpace sp = make_tensor_space(
            2, build_univariate_space(vdetail::grid_at_level(uniform, level), p));
        const double h4 = std::pow(sp.h_min(), -4.0);
        const Eigen::MatrixXd A = csr_to_dense(parametric_csr(sp, 1.0));
        const Eigen::MatrixXd Bhat = csr_to_dense(parametric_csr(sp, 0.0));
        const Eigen::MatrixXd Mhat = A - Bhat;
        const Eigen::MatrixXd X = Bhat + (1.0 + h4) * Mhat;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, X);
        VerifyCheck c;
        c.name = "lam_max(X^-1 A) [" + vdetail::cfg_tag(uniform, p, level) + "]";
        c.measured = es.eigenvalues().maxCoeff();
        c.bound = 1.0;
        c.relation = "<";
        c.ok = c.measured < c.bound;
        rep.checks.push_back(c);
        if (p == 3 && level == 2) {
          // Structural certificate: X - A equals h_min^-4 * mass and the mass
          // tensor is SPD, hence the strict bound holds at any scale.
          VerifyCheck cert;
          cert.name = std::string("certificate |(X-A) - h^-4 M| / |h^-4 M| [") +
                      (uniform ? "uniform" : "paper") + " grid, p=3, level=2]";
          cert.measured = (X - A - h4 * Mhat).cwiseAbs().maxCoeff() /
                          (h4 * Mhat).cwiseAbs().maxCoeff();
          cert.bound = 1e-12;
          cert.relation = "<=";
          cert.ok = cert.measured <= cert.bound &&
                    Eigen::LLT<Eigen::MatrixXd>(Mhat).info() == Eigen::Success;
          rep.checks.push_back(cert);
        }
      }
    }
  }

  // High-degree spot checks of the same bound via power iteration on the
  // (A, X) pencil with a factored X (the dense eigensolver is too slow here).
  for (int p : {7, 9}) {
    for (int level : {2, 3}) {
      TensorSpace sp =
          make_tensor_space(2, build_univariate_space(vdetail::grid_at_level(false, level), p));
      const double h4 = std::pow(sp.h_min(), -4.0);
      const CsrMatrix Acsr = parametric_csr(sp, 1.0);
      const Eigen::MatrixXd A = csr_to_dense(Acsr);
      const Eigen::MatrixXd Bhat = csr_to_dense(parametric_csr(sp, 0.0));
      const Eigen::MatrixXd X = Bhat + (1.0 + h4) * (A - Bhat);
      const Eigen::LLT<Eigen::MatrixXd> Xllt(X);
      // The top of the spectrum clusters within ~1e-6 of lam_max, so the
      // Rayleigh quotient cannot meet a convergence test; it approaches
      // lam_max from below and is reported as an estimate.  The pass/fail
      // instrument at this size is definiteness of the gap X - A, which is
      // exactly equivalent to lam_max(X^-1 A) < 1.
      const EigEstimate est = pencil_lambda_max(
          sp.dim(), [&](const double* v, double* y) { Acsr.matvec(v, y); },
          [&](const double* r, double* z) {
            Eigen::Map<const Eigen::VectorXd> rm(r, sp.dim());
            Eigen::Map<Eigen::VectorXd>(z, sp.dim()) = Xllt.solve(rm);
          },
          1e-9, 1200, 19);
      VerifyCheck c;
      c.name =
          "lam_max(X^-1 A) power-iteration estimate [" + vdetail::cfg_tag(false, p, level) + "]";
      c.measured = est.value;
      c.bound = 1.0;
      c.relation = "<";
      c.ok = std::isfinite(est.value) && est.value < 1.0;
      rep.checks.push_back(c);

      const Eigen::LLT<Eigen::MatrixXd> gap((X - A).eval());
      VerifyCheck d;
      d.name = "X - A positive definite, Cholesky success [" +
               vdetail::cfg_tag(false, p, level) + "]";
      d.measured = gap.info() == Eigen::Success ? 1.0 : 0.0;
      d.bound = 1.0;
      d.relation = ">=";
      d.ok = gap.info() == Eigen::Success;
      rep.checks.push_back(d);
    }
  }

  // V-cycle fixed point: an exact solution is left unchanged.
  for (SmootherKind kind : {SmootherKind::gs, SmootherKind::scms, SmootherKind::hybrid}) {
    SolverConfig cfg;
    cfg.degree = 3;
    cfg.levels = 2;
    cfg.smoother = kind;
    AssembledSystem S = build_system(cfg);
    const std::size_t n = S.mg.lv.back().n;
    Eigen::VectorXd xstar(n), b(n), x(n);
    fill_uniform_pm1(3, xstar.data(), n);
    S.mg.apply_fine()(xstar.data(), b.data());
    x = xstar;
    S.mg.vcycle(S.mg.top(), b.data(), x.data(), false);
    VerifyCheck c;
    c.name = std::string("V-cycle fixed point [2D, p=3, levels=2, ") + to_string(kind) + "]";
    c.measured = (x - xstar).norm() / xstar.norm();
    c.bound = 1e-11;
    c.relation = "<=";
    c.ok = c.measured <= c.bound;
    rep.checks.push_back(c);
  }

  // Determinism: identical seed gives bitwise identical iterates.
  {
    SolverConfig cfg;
    cfg.degree = 3;
    cfg.levels = 2;
    cfg.smoother = SmootherKind::scms;
    AssembledSystem S = build_system(cfg);
    const std::size_t n = S.mg.lv.back().n;
    Eigen::VectorXd x1(n), x2(n);
    const SolveReport r1 = mg_pcg_solve(S.mg, S.rhs, x1, cfg.rtol, cfg.max_iters, cfg.seed);
    const SolveReport r2 = mg_pcg_solve(S.mg, S.rhs, x2, cfg.rtol, cfg.max_iters, cfg.seed);
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < n; ++i) maxdiff = std::max(maxdiff, std::abs(x1[i] - x2[i]));
    VerifyCheck c;
    c.name = "determinism: repeated solve, identical seed [2D, p=3, levels=2]";
    c.measured = maxdiff;
    c.bound = 0.0;
    c.relation = "==";
    c.ok = maxdiff == 0.0 && r1.iterations == r2.iterations && r1.converged && r2.converged;
    rep.checks.push_back(c);
  }
  return rep;
}

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"approximation", "inverse", "equivalence",
                                                 "smoother", "eigen"};
  return names;
}

inline VerifyReport run_verify_suite(const std::string& name) {
  if (name == "approximation") return verify_approximation();
  if (name == "inverse") return verify_inverse();
  if (name == "equivalence") return verify_equivalence();
  if (name == "smoother") return verify_smoother();
  if (name == "eigen") return verify_eigen();
  throw std::invalid_argument("unknown verify suite: " + name);
}

inline void print_report(std::ostream& os, const VerifyReport& rep) {
  os << "suite: " << rep.suite << "\n";
  for (const VerifyCheck& c : rep.checks) {
    char m[32], b[32];
    std::snprintf(m, sizeof(m), "%.6g", c.measured);
    std::snprintf(b, sizeof(b), "%.6g", c.bound);
    os << "  [" << (c.ok ? "ok" : "VIOLATION") << "] " << c.name << " = " << m;
    if (c.relation != "reported") os << "  " << c.relation << " " << b;
    os << "\n";
  }
  os << "suite result: " << rep.checks.size() << " checks, " << rep.violations()
     << " violations\n";
}

}  // namespace igamg
