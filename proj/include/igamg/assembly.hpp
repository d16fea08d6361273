#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "igamg/csr.hpp"
#include "igamg/geometry.hpp"
#include "igamg/problem.hpp"
#include "igamg/tensor_space.hpp"

namespace igamg {

// --------------------------------------------------------------------------
// Parameter-domain operator in Kronecker form
// --------------------------------------------------------------------------

/// beta Mhat + Bhat as a short sum of Kronecker terms. With K = int b'' b and
/// the Dirichlet-reduced basis, integration by parts gives K = -G, so every
/// mixed second-derivative cross term becomes a product of gradient factors:
///   d=2:  Bhat = B(x)M + M(x)B + 2 G(x)G
///   d=3:  sum_i B_i (x) M (x) M  +  2 sum_{i<j} G_i (x) G_j (x) M.
struct KronOperator {
  TensorShape s;
  struct Term {
    double coeff = 1.0;
    std::array<const BandedSym*, 3> f = {nullptr, nullptr, nullptr};
  };
  std::vector<Term> terms;

  std::size_t size() const { return s.total(); }

  void apply(const double* x, double* y) const {
    const std::size_t n = s.total();
    if (t1_.size() != static_cast<Eigen::Index>(n)) {
      t1_.resize(n);
      t2_.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
    for (const Term& t : terms) {
      const double* src = x;
      for (int k = 0; k < s.d; ++k) {
        double* dst = (k % 2 == 0) ? t1_.data() : t2_.data();
        apply_banded_dir(*t.f[k], k, s, src, dst);
        src = dst;
      }
      for (std::size_t i = 0; i < n; ++i) y[i] += t.coeff * src[i];
    }
  }

 private:
  mutable Eigen::VectorXd t1_, t2_;
};

inline std::vector<KronOperator::Term> parametric_terms(const TensorSpace& sp, double beta) {
  std::vector<KronOperator::Term> terms;
  const auto M = [&](int k) { return &sp.dir[k]->M; };
  const auto B = [&](int k) { return &sp.dir[k]->B; };
  const auto G = [&](int k) { return &sp.dir[k]->G; };
  if (sp.d == 1) {
    terms.push_back({1.0, {B(0), nullptr, nullptr}});
    if (beta != 0.0) terms.push_back({beta, {M(0), nullptr, nullptr}});
    return terms;
  }
  for (int i = 0; i < sp.d; ++i) {
    KronOperator::Term t;
    t.coeff = 1.0;
    for (int k = 0; k < sp.d; ++k) t.f[k] = (k == i) ? B(k) : M(k);
    terms.push_back(t);
  }
  for (int i = 0; i < sp.d; ++i)
    for (int j = i + 1; j < sp.d; ++j) {
      KronOperator::Term t;
      t.coeff = 2.0;
      for (int k = 0; k < sp.d; ++k) t.f[k] = (k == i || k == j) ? G(k) : M(k);
      terms.push_back(t);
    }
  if (beta != 0.0) {
    KronOperator::Term t;
    t.coeff = beta;
    for (int k = 0; k < sp.d; ++k) t.f[k] = M(k);
    terms.push_back(t);
  }
  return terms;
}

inline KronOperator parametric_operator(const TensorSpace& sp, double beta) {
  KronOperator op;
  op.s = sp.shape();
  op.terms = parametric_terms(sp, beta);
  return op;
}

inline CsrMatrix parametric_csr(const TensorSpace& sp, double beta) {
  const auto terms = parametric_terms(sp, beta);
  std::vector<KronTerm> kt(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    kt[i].coeff = terms[i].coeff;
    kt[i].factor = terms[i].f;
  }
  return csr_from_kron(sp.shape(), kt);
}

/// Load vector for the manufactured problem on the parameter domain, where
/// the boundary data vanish: rhs = (beta + d^2 pi^4) (x)_k m_k with
/// m = univariate moments of sin(pi x) over the reduced basis.
inline Eigen::VectorXd parametric_manufactured_rhs(const TensorSpace& sp, double beta) {
  std::array<Eigen::VectorXd, 3> mom;
  for (int k = 0; k < sp.d; ++k) {
    const auto& u = *sp.dir[k];
    const Eigen::VectorXd full =
        assemble_moments(u.kv, [](double x) { return std::sin(M_PI * x); }, u.p + 10);
    mom[k] = full.segment(1, u.n);
  }
  ManufacturedProblem prob;
  prob.d = sp.d;
  const double c = beta + prob.bilaplacian_factor();
  const TensorShape s = sp.shape();
  Eigen::VectorXd rhs(s.total());
  std::array<int, 3> idx = {0, 0, 0};
  for (std::size_t r = 0; r < s.total(); ++r) {
    double v = c;
    for (int k = 0; k < sp.d; ++k) v *= mom[k][idx[k]];
    rhs[r] = v;
    for (int k = 0; k < sp.d; ++k) {
      if (++idx[k] < s.n[k]) break;
      idx[k] = 0;
    }
  }
  return rhs;
}

// --------------------------------------------------------------------------
// Shared CSR pattern for tensor-band matrices
// --------------------------------------------------------------------------

/// Sparsity pattern with couplings |i_k - j_k| <= bw_k in every direction
/// (the exact pattern of tensor-product splines of degree bw_k per direction).
inline CsrMatrix tensor_band_pattern(const TensorShape& s, const std::array<int, 3>& bw) {
  CsrMatrix A;
  A.n = static_cast<int>(s.total());
  A.rowptr.assign(A.n + 1, 0);
  std::array<int, 3> idx = {0, 0, 0};
  for (int r = 0; r < A.n; ++r) {
    std::int64_t cnt = 1;
    for (int k = 0; k < s.d; ++k) {
      const int lo = std::max(0, idx[k] - bw[k]);
      const int hi = std::min(s.n[k] - 1, idx[k] + bw[k]);
      cnt *= (hi - lo + 1);
    }
    A.rowptr[r + 1] = A.rowptr[r] + cnt;
    for (int k = 0; k < s.d; ++k) {
      if (++idx[k] < s.n[k]) break;
      idx[k] = 0;
    }
  }
  A.col.resize(A.rowptr[A.n]);
  A.val.assign(A.rowptr[A.n], 0.0);
  idx = {0, 0, 0};
  for (int r = 0; r < A.n; ++r) {
    std::int64_t pos = A.rowptr[r];
    std::array<int, 3> jlo = {0, 0, 0}, jhi = {0, 0, 0}, j = {0, 0, 0};
    for (int k = 0; k < s.d; ++k) {
      jlo[k] = std::max(0, idx[k] - bw[k]);
      jhi[k] = std::min(s.n[k] - 1, idx[k] + bw[k]);
      j[k] = jlo[k];
    }
    for (;;) {
      int c = 0;
      for (int k = s.d - 1; k >= 0; --k) c = c * s.n[k] + j[k];
      A.col[pos++] = c;
      int k = 0;
      for (; k < s.d; ++k) {
        if (++j[k] <= jhi[k]) break;
        j[k] = jlo[k];
      }
      if (k == s.d) break;
    }
    for (int k = 0; k < s.d; ++k) {
      if (++idx[k] < s.n[k]) break;
      idx[k] = 0;
    }
  }
  return A;
}

/// c0 * X + c1 * Y for matrices sharing one pattern.
inline CsrMatrix csr_combine(const CsrMatrix& X, const CsrMatrix& Y, double c0, double c1) {
  if (X.n != Y.n || X.nnz() != Y.nnz())
    throw std::invalid_argument("csr_combine: pattern mismatch");
  CsrMatrix A = X;
  for (std::size_t k = 0; k < A.val.size(); ++k) A.val[k] = c0 * X.val[k] + c1 * Y.val[k];
  return A;
}

// --------------------------------------------------------------------------
// Physical (mapped-domain) assembly
// --------------------------------------------------------------------------

namespace detail {

/// Per-direction quadrature and basis tables over the full basis.
struct DirTable {
  int p = 0, nspans = 0, q = 0, nf = 0;
  std::vector<double> pts, wts;       // nspans*q
  std::vector<double> v, d1, d2;      // nspans*q*(p+1)
  std::vector<int> first;             // nspans
};

inline DirTable make_dir_table(const KnotVector& kv, int q) {
  DirTable T;
  T.p = kv.degree;
  T.q = q;
  T.nf = kv.num_basis();
  const Breakpoints br = breakpoints_of(kv);
  T.nspans = static_cast<int>(br.size()) - 1;
  const QuadRule ref = gauss_legendre(q);
  T.pts.resize(static_cast<std::size_t>(T.nspans) * q);
  T.wts.resize(T.pts.size());
  const std::size_t stride = static_cast<std::size_t>(q) * (T.p + 1);
  T.v.resize(T.nspans * stride);
  T.d1.resize(T.nspans * stride);
  T.d2.resize(T.nspans * stride);
  T.first.resize(T.nspans);
  for (int s = 0; s < T.nspans; ++s) {
    const QuadRule qr = map_to_interval(ref, br[s], br[s + 1]);
    for (int g = 0; g < q; ++g) {
      T.pts[s * q + g] = qr.nodes[g];
      T.wts[s * q + g] = qr.weights[g];
      const BasisDers bd = eval_basis(kv, qr.nodes[g], 2);
      if (g == 0) T.first[s] = bd.first_index;
      for (int j = 0; j <= T.p; ++j) {
        T.v[s * stride + g * (T.p + 1) + j] = bd.ders(0, j);
        T.d1[s * stride + g * (T.p + 1) + j] = bd.ders(1, j);
        T.d2[s * stride + g * (T.p + 1) + j] = bd.ders(2, j);
      }
    }
  }
  return T;
}

inline bool all_interior(const std::array<int, 3>& gi, const std::array<int, 3>& nf, int d) {
  for (int k = 0; k < d; ++k)
    if (gi[k] < 1 || gi[k] > nf[k] - 2) return false;
  return true;
}

/// d x d inverse and determinant for d = 2, 3 (row-major).
inline double invert_small(int d, const double* J, double* Ji) {
  if (d == 2) {
    const double det = J[0] * J[3] - J[1] * J[2];
    const double inv = 1.0 / det;
    Ji[0] = J[3] * inv;
    Ji[1] = -J[1] * inv;
    Ji[2] = -J[2] * inv;
    Ji[3] = J[0] * inv;
    return det;
  }
  const double c00 = J[4] * J[8] - J[5] * J[7];
  const double c01 = J[5] * J[6] - J[3] * J[8];
  const double c02 = J[3] * J[7] - J[4] * J[6];
  const double det = J[0] * c00 + J[1] * c01 + J[2] * c02;
  const double inv = 1.0 / det;
  Ji[0] = c00 * inv;
  Ji[1] = (J[2] * J[7] - J[1] * J[8]) * inv;
  Ji[2] = (J[1] * J[5] - J[2] * J[4]) * inv;
  Ji[3] = c01 * inv;
  Ji[4] = (J[0] * J[8] - J[2] * J[6]) * inv;
  Ji[5] = (J[2] * J[3] - J[0] * J[5]) * inv;
  Ji[6] = c02 * inv;
  Ji[7] = (J[1] * J[6] - J[0] * J[7]) * inv;
  Ji[8] = (J[0] * J[4] - J[1] * J[3]) * inv;
  return det;
}

}  // namespace detail

/// Galerkin pieces of the mapped biharmonic problem over the interior
/// (Dirichlet-reduced) tensor basis. Mass and second-order forms are kept
/// separately so different beta values reuse one assembly:
///   A(beta) = beta M + B,
///   rhs(beta) = (beta + d^2 pi^4) mom_u + bterm - beta liftM - liftB.
struct PhysicalPieces {
  TensorShape shape;
  CsrMatrix M, B;
  Eigen::VectorXd mom_u;      // int u phi_i |det J|
  Eigen::VectorXd liftM, liftB;  // mass/second-order coupling to boundary data
  Eigen::VectorXd bterm;      // oint g2 dn(phi_i) ds
  Eigen::VectorXd lift_full;  // boundary coefficients in the full tensor basis
  double bilap = 0.0;         // d^2 pi^4

  Eigen::VectorXd rhs(double beta) const {
    return (beta + bilap) * mom_u + bterm - beta * liftM - liftB;
  }
  CsrMatrix combined(double beta) const { return csr_combine(M, B, beta, 1.0); }

  /// Destructive variant for large systems: forms beta M + B inside M's
  /// storage, releases B, and moves the result out. M and B are empty after.
  CsrMatrix take_combined(double beta) {
    for (std::size_t k = 0; k < M.val.size(); ++k) M.val[k] = beta * M.val[k] + B.val[k];
    B = CsrMatrix{};
    CsrMatrix A = std::move(M);
    M = CsrMatrix{};
    return A;
  }
};

/// Boundary coefficients reproducing g1 on the domain boundary: corner values
/// first, then least-squares fits of the residual trace stratum by stratum
/// (edges, then faces in 3D) at twice-oversampled Greville points.
inline Eigen::VectorXd fit_boundary_lift(const TensorSpace& sp, const Geometry& geo,
                                         const std::function<double(const double*)>& g1) {
  const int d = sp.d;
  std::array<int, 3> nf = {1, 1, 1};
  for (int k = 0; k < d; ++k) nf[k] = sp.dir[k]->n_full;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(nf[k]);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(total);
  const auto lin = [&](const std::array<int, 3>& i) {
    std::size_t r = 0;
    for (int k = d - 1; k >= 0; --k) r = r * nf[k] + i[k];
    return r;
  };
  const auto geval = [&](const std::array<double, 3>& xi) {
    double x[3];
    geo.eval(xi.data(), x);
    return g1(x);
  };

  // per-direction sample data (directions may share univariate spaces)
  struct FitData {
    std::vector<double> samples;
    std::vector<int> first;
    std::vector<double> vals;  // per sample, p+1 active values
    BandedChol N_chol;         // interior-function normal matrix
    int p = 0, nf = 0;
  };
  std::array<FitData, 3> fit;
  for (int k = 0; k < d; ++k) {
    const auto& u = *sp.dir[k];
    FitData& F = fit[k];
    F.p = u.p;
    F.nf = u.n_full;
    const KnotVector fine = make_open_knots(refine_uniform(u.breaks), u.p);
    F.samples = greville_points(fine);
    const int S = static_cast<int>(F.samples.size());
    F.first.resize(S);
    F.vals.resize(static_cast<std::size_t>(S) * (u.p + 1));
    BandedSym N(u.n_full - 2, u.p);
    for (int s = 0; s < S; ++s) {
      const BasisDers bd = eval_basis(u.kv, F.samples[s], 0);
      F.first[s] = bd.first_index;
      for (int j = 0; j <= u.p; ++j) {
        const double vj = bd.ders(0, j);
        F.vals[static_cast<std::size_t>(s) * (u.p + 1) + j] = vj;
        const int ia = bd.first_index + j;
        if (ia < 1 || ia > u.n_full - 2) continue;
        for (int l = 0; l <= j; ++l) {
          const int ib = bd.first_index + l;
          if (ib < 1 || ib > u.n_full - 2) continue;
          N.add(ia - 1, ib - 1, vj * F.vals[static_cast<std::size_t>(s) * (u.p + 1) + l]);
        }
      }
    }
    if (!F.N_chol.factor(N))
      throw std::runtime_error("boundary fit: normal matrix is rank deficient");
  }

  // evaluate the currently fixed boundary spline at a parametric point that
  // lies on a face/edge (only fixed strata contribute so far)
  const auto eval_fixed = [&](const std::array<double, 3>& xi,
                              const std::array<int, 3>& constrained) {
    std::array<const BasisDers*, 3> bd = {nullptr, nullptr, nullptr};
    std::array<BasisDers, 3> store;
    for (int k = 0; k < d; ++k) {
      store[k] = eval_basis(sp.dir[k]->kv, xi[k], 0);
      bd[k] = &store[k];
    }
    double acc = 0.0;
    std::array<int, 3> j = {0, 0, 0};
    for (;;) {
      double v = 1.0;
      std::array<int, 3> gi = {0, 0, 0};
      for (int k = 0; k < d; ++k) {
        gi[k] = bd[k]->first_index + j[k];
        v *= bd[k]->ders(0, j[k]);
      }
      // previously fitted strata have some free-direction index at an
      // endpoint; unknowns of the current stratum are still zero in `lift`
      bool fixed_entry = false;
      for (int k = 0; k < d; ++k)
        if (constrained[k] == 0 && (gi[k] == 0 || gi[k] == nf[k] - 1)) fixed_entry = true;
      if (v != 0.0 && fixed_entry) acc += lift[lin(gi)] * v;
      int k = 0;
      for (; k < d; ++k) {
        if (++j[k] <= sp.dir[k]->p) break;
        j[k] = 0;
      }
      if (k == d) break;
    }
    return acc;
  };

  // ---- corners
  for (int mask = 0; mask < (1 << d); ++mask) {
    std::array<int, 3> gi = {0, 0, 0};
    std::array<double, 3> xi = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
      const bool high = (mask >> k) & 1;
      gi[k] = high ? nf[k] - 1 : 0;
      xi[k] = high ? 1.0 : 0.0;
    }
    lift[lin(gi)] = geval(xi);
  }

  // ---- strata with one free direction (2D edges, 3D edges)
  const int nfree_first = 1;
  for (int free_dirs = nfree_first; free_dirs <= (d == 3 ? 2 : 1); ++free_dirs) {
    // enumerate strata: choose the set of free directions and the sides of
    // the constrained ones
    std::vector<std::array<int, 3>> free_sets;
    if (free_dirs == 1) {
      for (int t = 0; t < d; ++t) free_sets.push_back({t, -1, -1});
    } else {
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) free_sets.push_back({a, b, -1});
    }
    for (const auto& fs : free_sets) {
      std::vector<int> cons;
      for (int k = 0; k < d; ++k)
        if (k != fs[0] && k != fs[1]) cons.push_back(k);
      const int nc = static_cast<int>(cons.size());
      if (nc + free_dirs != d) continue;
      for (int smask = 0; smask < (1 << nc); ++smask) {
        std::array<int, 3> gi = {0, 0, 0};
        std::array<double, 3> xi = {0, 0, 0};
        std::array<int, 3> constrained = {0, 0, 0};
        for (int c = 0; c < nc; ++c) {
          const bool high = (smask >> c) & 1;
          gi[cons[c]] = high ? nf[cons[c]] - 1 : 0;
          xi[cons[c]] = high ? 1.0 : 0.0;
          constrained[cons[c]] = 1;
        }
        if (free_dirs == 1) {
          const int t = fs[0];
          const FitData& F = fit[t];
          const int S = static_cast<int>(F.samples.size());
          Eigen::VectorXd rhs = Eigen::VectorXd::Zero(F.nf - 2);
          for (int s = 0; s < S; ++s) {
            xi[t] = F.samples[s];
            double res = geval(xi) - eval_fixed(xi, constrained);
            if (res == 0.0) continue;
            for (int j = 0; j <= F.p; ++j) {
              const int ia = F.first[s] + j;
              if (ia < 1 || ia > F.nf - 2) continue;
              rhs[ia - 1] += F.vals[static_cast<std::size_t>(s) * (F.p + 1) + j] * res;
            }
          }
          F.N_chol.solve(rhs.data());
          for (int i = 1; i <= F.nf - 2; ++i) {
            gi[t] = i;
            lift[lin(gi)] = rhs[i - 1];
          }
        } else {
          const int a = fs[0], b = fs[1];
          const FitData& Fa = fit[a];
          const FitData& Fb = fit[b];
          const int Sa = static_cast<int>(Fa.samples.size());
          const int Sb = static_cast<int>(Fb.samples.size());
          const int na = Fa.nf - 2, nb = Fb.nf - 2;
          Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(na, nb);
          for (int sb = 0; sb < Sb; ++sb) {
            xi[b] = Fb.samples[sb];
            for (int sa = 0; sa < Sa; ++sa) {
              xi[a] = Fa.samples[sa];
              const double res = geval(xi) - eval_fixed(xi, constrained);
              if (res == 0.0) continue;
              for (int jb = 0; jb <= Fb.p; ++jb) {
                const int ib = Fb.first[sb] + jb;
                if (ib < 1 || ib > Fb.nf - 2) continue;
                const double vb =
                    Fb.vals[static_cast<std::size_t>(sb) * (Fb.p + 1) + jb] * res;
                for (int ja = 0; ja <= Fa.p; ++ja) {
                  const int ia = Fa.first[sa] + ja;
                  if (ia < 1 || ia > Fa.nf - 2) continue;
                  rhs(ia - 1, ib - 1) +=
                      Fa.vals[static_cast<std::size_t>(sa) * (Fa.p + 1) + ja] * vb;
                }
              }
            }
          }
          // Kronecker normal equations: (Na (x) Nb)^{-1} via direction solves
          for (int cb = 0; cb < nb; ++cb) Fa.N_chol.solve(rhs.col(cb).data());
          Eigen::MatrixXd rt = rhs.transpose();
          for (int ca = 0; ca < na; ++ca) Fb.N_chol.solve(rt.col(ca).data());
          for (int ib = 1; ib <= nb; ++ib) {
            gi[b] = ib;
            for (int ia = 1; ia <= na; ++ia) {
              gi[a] = ia;
              lift[lin(gi)] = rt(ib - 1, ia - 1);
            }
          }
        }
      }
    }
    if (d == 2) break;  // edges are the final stratum in 2D
  }
  return lift;
}

/// Element-loop assembly of the mapped problem: mass and second-order CSR
/// matrices over interior functions, manufactured-solution moments, boundary
/// lifting couplings, and the natural boundary term for g2.
inline PhysicalPieces assemble_physical(const TensorSpace& sp, const Geometry& geo,
                                        const ManufacturedProblem& prob,
                                        int quad_points_per_span = 0) {
  const int d = sp.d;
  if (geo.dim() != d) throw std::invalid_argument("assemble_physical: dimension mismatch");

  PhysicalPieces P;
  P.shape = sp.shape();
  P.bilap = prob.bilaplacian_factor();
  const std::size_t ntot = P.shape.total();
  P.mom_u = Eigen::VectorXd::Zero(ntot);
  P.liftM = Eigen::VectorXd::Zero(ntot);
  P.liftB = Eigen::VectorXd::Zero(ntot);
  P.bterm = Eigen::VectorXd::Zero(ntot);

  P.lift_full = fit_boundary_lift(sp, geo, [&](const double* x) { return prob.g1(x); });

  std::array<int, 3> bw = {0, 0, 0};
  std::array<int, 3> nf = {1, 1, 1};
  for (int k = 0; k < d; ++k) {
    bw[k] = sp.dir[k]->p;
    nf[k] = sp.dir[k]->n_full;
  }
  P.M = tensor_band_pattern(P.shape, bw);
  P.B = P.M;

  std::array<detail::DirTable, 3> T;
  for (int k = 0; k < d; ++k) {
    const int q = quad_points_per_span > 0 ? quad_points_per_span : sp.dir[k]->p + 1;
    T[k] = detail::make_dir_table(sp.dir[k]->kv, q);
  }

  std::array<int, 3> pl = {0, 0, 0};  // degree+1 per direction
  int nloc = 1;
  for (int k = 0; k < d; ++k) {
    pl[k] = sp.dir[k]->p + 1;
    nloc *= pl[k];
  }
  std::vector<double> val(nloc), lap(nloc);
  std::vector<double> Ml(static_cast<std::size_t>(nloc) * nloc, 0.0);
  std::vector<double> Bl(Ml.size(), 0.0);
  std::vector<double> rl(nloc, 0.0);

  std::array<int, 3> span = {0, 0, 0};
  std::array<int, 3> nspans = {1, 1, 1};
  for (int k = 0; k < d; ++k) nspans[k] = T[k].nspans;

  for (;;) {  // element loop
    std::fill(Ml.begin(), Ml.end(), 0.0);
    std::fill(Bl.begin(), Bl.end(), 0.0);
    std::fill(rl.begin(), rl.end(), 0.0);

    std::array<int, 3> g = {0, 0, 0};
    std::array<int, 3> nq = {1, 1, 1};
    for (int k = 0; k < d; ++k) nq[k] = T[k].q;
    for (;;) {  // quadrature loop
      std::array<double, 3> xi = {0, 0, 0};
      double w = 1.0;
      std::array<const double*, 3> vv, dd, d2;
      for (int k = 0; k < d; ++k) {
        const int sgi = span[k] * T[k].q + g[k];
        xi[k] = T[k].pts[sgi];
        w *= T[k].wts[sgi];
        const std::size_t off = static_cast<std::size_t>(sgi) * pl[k];
        vv[k] = T[k].v.data() + off;
        dd[k] = T[k].d1.data() + off;
        d2[k] = T[k].d2.data() + off;
      }
      double J[9], Ji[9], x[3];
      geo.jacobian(xi.data(), J);
      const double detJ = detail::invert_small(d, J, Ji);
      if (!(detJ > 0.0))
        throw std::runtime_error("assemble_physical: nonpositive jacobian determinant");
      geo.eval(xi.data(), x);
      // S = J^{-1} J^{-T}; sc_c = S : Hess(G_c)
      double S[9];
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          double s = 0.0;
          for (int k = 0; k < d; ++k) s += Ji[a * d + k] * Ji[b * d + k];
          S[a * d + b] = s;
          S[b * d + a] = s;
        }
      double sc[3] = {0, 0, 0};
      bool curved = !geo.is_identity();
      double HG[3][9];
      if (curved)
        for (int c = 0; c < d; ++c) {
          geo.hessian(xi.data(), c, HG[c]);
          double s = 0.0;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) s += S[a * d + b] * HG[c][a * d + b];
          sc[c] = s;
        }

      // basis values and mapped laplacians for all local functions
      int li = 0;
      if (d == 2) {
        for (int j1 = 0; j1 < pl[1]; ++j1) {
          const double v1 = vv[1][j1], e1 = dd[1][j1], f1 = d2[1][j1];
          for (int j0 = 0; j0 < pl[0]; ++j0, ++li) {
            const double v0 = vv[0][j0], e0 = dd[0][j0], f0 = d2[0][j0];
            const double gp0 = e0 * v1, gp1 = v0 * e1;
            const double h00 = f0 * v1, h11 = v0 * f1, h01 = e0 * e1;
            double SH = S[0] * h00 + S[3] * h11 + 2.0 * S[1] * h01;
            if (curved) {
              const double gx0 = Ji[0] * gp0 + Ji[2] * gp1;  // J^{-T} gp
              const double gx1 = Ji[1] * gp0 + Ji[3] * gp1;
              SH -= gx0 * sc[0] + gx1 * sc[1];
            }
            val[li] = v0 * v1;
            lap[li] = SH;
          }
        }
      } else {
        for (int j2 = 0; j2 < pl[2]; ++j2) {
          const double v2 = vv[2][j2], e2 = dd[2][j2], f2 = d2[2][j2];
          for (int j1 = 0; j1 < pl[1]; ++j1) {
            const double v12 = vv[1][j1] * v2, e1v2 = dd[1][j1] * v2, v1e2 = vv[1][j1] * e2;
            const double f1v2 = d2[1][j1] * v2, v1f2 = vv[1][j1] * f2, e1e2 = dd[1][j1] * e2;
            for (int j0 = 0; j0 < pl[0]; ++j0, ++li) {
              const double v0 = vv[0][j0], e0 = dd[0][j0], f0 = d2[0][j0];
              const double gp0 = e0 * v12, gp1 = v0 * e1v2, gp2 = v0 * v1e2;
              const double h00 = f0 * v12, h11 = v0 * f1v2, h22 = v0 * v1f2;
              const double h01 = e0 * e1v2, h02 = e0 * v1e2, h12 = v0 * e1e2;
              double SH = S[0] * h00 + S[4] * h11 + S[8] * h22 +
                          2.0 * (S[1] * h01 + S[2] * h02 + S[5] * h12);
              if (curved) {
                const double gx0 = Ji[0] * gp0 + Ji[3] * gp1 + Ji[6] * gp2;
                const double gx1 = Ji[1] * gp0 + Ji[4] * gp1 + Ji[7] * gp2;
                const double gx2 = Ji[2] * gp0 + Ji[5] * gp1 + Ji[8] * gp2;
                SH -= gx0 * sc[0] + gx1 * sc[1] + gx2 * sc[2];
              }
              val[li] = v0 * v12;
              lap[li] = SH;
            }
          }
        }
      }

      const double wj = w * detJ;
      const double uw = wj * prob.u(x);
      for (int a = 0; a < nloc; ++a) {
        const double va = wj * val[a], la = wj * lap[a];
        double* Mrow = Ml.data() + static_cast<std::size_t>(a) * nloc;
        double* Brow = Bl.data() + static_cast<std::size_t>(a) * nloc;
        for (int b = a; b < nloc; ++b) {
          Mrow[b] += va * val[b];
          Brow[b] += la * lap[b];
        }
        rl[a] += uw * val[a];
      }

      int k = 0;
      for (; k < d; ++k) {
        if (++g[k] < nq[k]) break;
        g[k] = 0;
      }
      if (k == d) break;
    }

    // ---- scatter
    std::array<int, 3> firsts = {0, 0, 0};
    for (int k = 0; k < d; ++k) firsts[k] = T[k].first[span[k]];
    const auto decompose = [&](int a, std::array<int, 3>& gidx) {
      for (int k = 0; k < d; ++k) {
        gidx[k] = firsts[k] + a % pl[k];
        a /= pl[k];
      }
    };
    const auto interior = [&](const std::array<int, 3>& gi) {
      for (int k = 0; k < d; ++k)
        if (gi[k] < 1 || gi[k] > nf[k] - 2) return false;
      return true;
    };
    const auto reduced_lin = [&](const std::array<int, 3>& gi) {
      std::size_t r = 0;
      for (int k = d - 1; k >= 0; --k) r = r * (nf[k] - 2) + (gi[k] - 1);
      return r;
    };
    const auto full_lin = [&](const std::array<int, 3>& gi) {
      std::size_t r = 0;
      for (int k = d - 1; k >= 0; --k) r = r * nf[k] + gi[k];
      return r;
    };
    const auto csr_pos = [&](std::size_t row, const std::array<int, 3>& rgi,
                             const std::array<int, 3>& cgi) {
      std::int64_t off = 0;
      for (int k = d - 1; k >= 0; --k) {
        const int lo = std::max(0, rgi[k] - 1 - bw[k]);
        const int hi = std::min(nf[k] - 3, rgi[k] - 1 + bw[k]);
        off = off * (hi - lo + 1) + (cgi[k] - 1 - lo);
      }
      return P.M.rowptr[row] + off;
    };

    for (int a = 0; a < nloc; ++a) {
      std::array<int, 3> ga;
      decompose(a, ga);
      const bool ia = interior(ga);
      for (int b = a; b < nloc; ++b) {
        std::array<int, 3> gb;
        decompose(b, gb);
        const bool ib = interior(gb);
        const double mv = Ml[static_cast<std::size_t>(a) * nloc + b];
        const double bv = Bl[static_cast<std::size_t>(a) * nloc + b];
        if (ia && ib) {
          const std::size_t ra = reduced_lin(ga), rb = reduced_lin(gb);
          const std::int64_t pab = csr_pos(ra, ga, gb);
          P.M.val[pab] += mv;
          P.B.val[pab] += bv;
          if (a != b) {
            const std::int64_t pba = csr_pos(rb, gb, ga);
            P.M.val[pba] += mv;
            P.B.val[pba] += bv;
          }
        } else if (ia && !ib) {
          const double c = P.lift_full[full_lin(gb)];
          const std::size_t ra = reduced_lin(ga);
          P.liftM[ra] += mv * c;
          P.liftB[ra] += bv * c;
        } else if (!ia && ib) {
          const double c = P.lift_full[full_lin(ga)];
          const std::size_t rb = reduced_lin(gb);
          P.liftM[rb] += mv * c;
          P.liftB[rb] += bv * c;
        }
      }
      if (ia) P.mom_u[reduced_lin(ga)] += rl[a];
    }

    int k = 0;
    for (; k < d; ++k) {
      if (++span[k] < nspans[k]) break;
      span[k] = 0;
    }
    if (k == d) break;
  }

  // ---- natural boundary term: oint g2 dn(phi) ds over every face
  for (int cdir = 0; cdir < d; ++cdir) {
    for (int side = 0; side < 2; ++side) {
      const double xc = side == 0 ? 0.0 : 1.0;
      const BasisDers edge = eval_basis(sp.dir[cdir]->kv, xc, 1);
      std::array<int, 3> fdir = {-1, -1, -1};
      int nfree = 0;
      for (int k = 0; k < d; ++k)
        if (k != cdir) fdir[nfree++] = k;

      std::array<int, 3> fspan = {0, 0, 0};
      for (;;) {  // face element loop
        std::array<int, 3> g = {0, 0, 0};
        for (;;) {  // face quadrature loop
          std::array<double, 3> xi = {0, 0, 0};
          xi[cdir] = xc;
          double w = 1.0;
          std::array<const double*, 3> vv = {nullptr, nullptr, nullptr};
          std::array<const double*, 3> dd = {nullptr, nullptr, nullptr};
          for (int fk = 0; fk < nfree; ++fk) {
            const int k = fdir[fk];
            const int sgi = fspan[fk] * T[k].q + g[fk];
            xi[k] = T[k].pts[sgi];
            w *= T[k].wts[sgi];
            const std::size_t off = static_cast<std::size_t>(sgi) * pl[k];
            vv[k] = T[k].v.data() + off;
            dd[k] = T[k].d1.data() + off;
          }
          double J[9], Ji[9], x[3];
          geo.jacobian(xi.data(), J);
          detail::invert_small(d, J, Ji);
          geo.eval(xi.data(), x);
          // surface measure
          double ds = 0.0;
          if (d == 2) {
            const int t = fdir[0];
            double c0 = J[0 * d + t], c1 = J[1 * d + t];
            ds = std::sqrt(c0 * c0 + c1 * c1);
          } else {
            const int ta = fdir[0], tb = fdir[1];
            double ca[3], cb[3];
            for (int a = 0; a < 3; ++a) {
              ca[a] = J[a * d + ta];
              cb[a] = J[a * d + tb];
            }
            const double cx = ca[1] * cb[2] - ca[2] * cb[1];
            const double cy = ca[2] * cb[0] - ca[0] * cb[2];
            const double cz = ca[0] * cb[1] - ca[1] * cb[0];
            ds = std::sqrt(cx * cx + cy * cy + cz * cz);
          }
          // outward unit normal: +- J^{-T} e_cdir normalized
          double nvec[3] = {0, 0, 0};
          double nn = 0.0;
          for (int a = 0; a < d; ++a) {
            nvec[a] = Ji[cdir * d + a];  // row cdir of J^{-1} = col cdir of J^{-T}
            nn += nvec[a] * nvec[a];
          }
          nn = std::sqrt(nn);
          const double sgn = (side == 0 ? -1.0 : 1.0) / nn;
          for (int a = 0; a < d; ++a) nvec[a] *= sgn;

          const double gw = w * ds * prob.g2(x);

          // local functions: tensor of face funcs and the p+1 edge funcs
          std::array<int, 3> j = {0, 0, 0};
          for (;;) {
            std::array<int, 3> gi = {0, 0, 0};
            double vprod[3], dprod[3];
            // per-direction value/derivative of this local function
            bool nonzero = true;
            for (int k = 0; k < d; ++k) {
              double vk, dk;
              if (k == cdir) {
                gi[k] = edge.first_index + j[k];
                vk = edge.ders(0, j[k]);
                dk = edge.ders(1, j[k]);
              } else {
                const int fk = (k == fdir[0]) ? 0 : 1;
                gi[k] = T[k].first[fspan[fk]] + j[k];
                vk = vv[k][j[k]];
                dk = dd[k][j[k]];
              }
              vprod[k] = vk;
              dprod[k] = dk;
              if (vk == 0.0 && dk == 0.0) nonzero = false;
            }
            if (nonzero && detail::all_interior(gi, nf, d)) {
              // parametric gradient
              double gp[3];
              for (int k = 0; k < d; ++k) {
                double t = dprod[k];
                for (int l = 0; l < d; ++l)
                  if (l != k) t *= vprod[l];
                gp[k] = t;
              }
              double dn = 0.0;
              for (int c = 0; c < d; ++c) {
                double gx = 0.0;
                for (int k = 0; k < d; ++k) gx += Ji[k * d + c] * gp[k];
                dn += nvec[c] * gx;
              }
              if (dn != 0.0) {
                std::size_t r = 0;
                for (int k = d - 1; k >= 0; --k) r = r * (nf[k] - 2) + (gi[k] - 1);
                P.bterm[r] += gw * dn;
              }
            }
            int k = 0;
            for (; k < d; ++k) {
              if (++j[k] < pl[k]) break;
              j[k] = 0;
            }
            if (k == d) break;
          }

          int k = 0;
          for (; k < nfree; ++k) {
            if (++g[k] < T[fdir[k]].q) break;
            g[k] = 0;
          }
          if (k == nfree) break;
        }
        int k = 0;
        for (; k < nfree; ++k) {
          if (++fspan[k] < T[fdir[k]].nspans) break;
          fspan[k] = 0;
        }
        if (k == nfree) break;
      }
    }
  }

  return P;
}

/// L2 error over the mapped domain of the discrete solution (interior
/// coefficients plus boundary lifting) against a reference function.
template <class Exact>
double physical_l2_error(const TensorSpace& sp, const Geometry& geo,
                         const Eigen::VectorXd& u_reduced, const Eigen::VectorXd& lift_full,
                         Exact&& exact, int quad_points_per_span = 0) {
  const int d = sp.d;
  std::array<int, 3> nf = {1, 1, 1};
  std::array<int, 3> pl = {1, 1, 1};
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    nf[k] = sp.dir[k]->n_full;
    pl[k] = sp.dir[k]->p + 1;
    total *= static_cast<std::size_t>(nf[k]);
  }
  Eigen::VectorXd c_full = lift_full.size() == static_cast<Eigen::Index>(total)
                               ? lift_full
                               : Eigen::VectorXd::Zero(total);
  // scatter interior coefficients
  {
    std::array<int, 3> gi = {1, 1, 1};
    for (Eigen::Index r = 0; r < u_reduced.size(); ++r) {
      std::size_t f = 0;
      for (int k = d - 1; k >= 0; --k) f = f * nf[k] + gi[k];
      c_full[f] = u_reduced[r];
      for (int k = 0; k < d; ++k) {
        if (++gi[k] <= nf[k] - 2) break;
        gi[k] = 1;
      }
    }
  }

  std::array<detail::DirTable, 3> T;
  for (int k = 0; k < d; ++k) {
    const int q = quad_points_per_span > 0 ? quad_points_per_span : sp.dir[k]->p + 2;
    T[k] = detail::make_dir_table(sp.dir[k]->kv, q);
  }

  double err2 = 0.0;
  std::array<int, 3> span = {0, 0, 0};
  for (;;) {
    std::array<int, 3> g = {0, 0, 0};
    for (;;) {
      std::array<double, 3> xi = {0, 0, 0};
      double w = 1.0;
      std::array<const double*, 3> vv;
      for (int k = 0; k < d; ++k) {
        const int sgi = span[k] * T[k].q + g[k];
        xi[k] = T[k].pts[sgi];
        w *= T[k].wts[sgi];
        vv[k] = T[k].v.data() + static_cast<std::size_t>(sgi) * pl[k];
      }
      double J[9], Ji[9], x[3];
      geo.jacobian(xi.data(), J);
      const double detJ = detail::invert_small(d, J, Ji);
      geo.eval(xi.data(), x);

      double uh = 0.0;
      std::array<int, 3> j = {0, 0, 0};
      for (;;) {
        double v = 1.0;
        std::size_t f = 0;
        for (int k = d - 1; k >= 0; --k) {
          v *= vv[k][j[k]];
          f = f * nf[k] + (T[k].first[span[k]] + j[k]);
        }
        uh += c_full[f] * v;
        int k = 0;
        for (; k < d; ++k) {
          if (++j[k] < pl[k]) break;
          j[k] = 0;
        }
        if (k == d) break;
      }
      const double diff = uh - exact(x);
      err2 += w * std::abs(detJ) * diff * diff;

      int k = 0;
      for (; k < d; ++k) {
        if (++g[k] < T[k].q) break;
        g[k] = 0;
      }
      if (k == d) break;
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++span[k] < T[k].nspans) break;
      span[k] = 0;
    }
    if (k == d) break;
  }
  return std::sqrt(err2);
}

}  // namespace igamg
