#pragma once

#include <Eigen/Dense>
#include <functional>

#include "igamg/banded.hpp"
#include "igamg/bspline.hpp"
#include "igamg/quadrature.hpp"

namespace igamg {

/// Univariate Galerkin forms: mass \int b_i b_j, biharmonic \int b_i'' b_j'',
/// grad \int b_i' b_j'.
enum class UnivariateForm { mass, biharmonic, grad };

/// Assemble a univariate form over the full (unreduced) basis. Quadrature is
/// Gauss–Legendre per span; 0 points requests the degree+1 default, which is
/// exact for products of splines of the same degree.
inline BandedSym assemble_univariate(const KnotVector& kv, UnivariateForm form,
                                     int quad_points_per_span = 0) {
  const int p = kv.degree;
  const int n = kv.num_basis();
  const int q = quad_points_per_span > 0 ? quad_points_per_span : p + 1;
  const int der = form == UnivariateForm::mass ? 0 : (form == UnivariateForm::grad ? 1 : 2);
  const QuadRule ref = gauss_legendre(q);
  const Breakpoints br = breakpoints_of(kv);

  BandedSym A(n, p);
  for (std::size_t s = 0; s + 1 < br.size(); ++s) {
    const QuadRule qr = map_to_interval(ref, br[s], br[s + 1]);
    for (int g = 0; g < qr.size(); ++g) {
      const BasisDers bd = eval_basis(kv, qr.nodes[g], der);
      const double w = qr.weights[g];
      for (int a = 0; a <= p; ++a) {
        const double va = bd.ders(der, a);
        const int ia = bd.first_index + a;
        for (int b = 0; b <= a; ++b)
          A.add(ia, bd.first_index + b, w * va * bd.ders(der, b));
      }
    }
  }
  return A;
}

/// Moment vector m_i = \int f(x) b_i(x) dx with a per-span Gauss rule.
inline Eigen::VectorXd assemble_moments(const KnotVector& kv,
                                        const std::function<double(double)>& f,
                                        int quad_points_per_span) {
  const int p = kv.degree;
  const QuadRule ref = gauss_legendre(quad_points_per_span);
  const Breakpoints br = breakpoints_of(kv);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(kv.num_basis());
  for (std::size_t s = 0; s + 1 < br.size(); ++s) {
    const QuadRule qr = map_to_interval(ref, br[s], br[s + 1]);
    for (int g = 0; g < qr.size(); ++g) {
      const BasisDers bd = eval_basis(kv, qr.nodes[g], 0);
      const double wf = qr.weights[g] * f(qr.nodes[g]);
      for (int a = 0; a <= p; ++a) m[bd.first_index + a] += wf * bd.ders(0, a);
    }
  }
  return m;
}

/// L2(a,b) norm of a callable, integrated per span of the given grid.
inline double l2_norm(const Breakpoints& br, const std::function<double(double)>& f,
                      int quad_points_per_span) {
  const QuadRule ref = gauss_legendre(quad_points_per_span);
  double s2 = 0.0;
  for (std::size_t s = 0; s + 1 < br.size(); ++s) {
    const QuadRule qr = map_to_interval(ref, br[s], br[s + 1]);
    for (int g = 0; g < qr.size(); ++g) {
      const double v = f(qr.nodes[g]);
      s2 += qr.weights[g] * v * v;
    }
  }
  return std::sqrt(s2);
}

}  // namespace igamg
