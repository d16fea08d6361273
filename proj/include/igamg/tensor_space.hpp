#pragma once

#include <array>
#include <memory>

#include "igamg/direction_split.hpp"
#include "igamg/grid.hpp"
#include "igamg/univariate_assembly.hpp"

namespace igamg {

/// One direction of a discretization level: knot vector, Dirichlet-reduced
/// parametric Galerkin factors, and the S0/S1 splitting.
struct UnivariateLevelSpace {
  KnotVector kv;
  Breakpoints breaks;
  int p = 0;
  int n_full = 0;
  int n = 0;  // reduced dimension
  double h_min = 0.0, h_max = 0.0;
  BandedSym M, B, G;  // mass, second-derivative, gradient forms (reduced)
  DirectionSplit split;
};

inline std::shared_ptr<const UnivariateLevelSpace> build_univariate_space(
    const Breakpoints& breaks, int degree, int quad_points_per_span = 0,
    bool force_dense_nullspace = false) {
  auto u = std::make_shared<UnivariateLevelSpace>();
  u->breaks = breaks;
  u->p = degree;
  u->kv = make_open_knots(breaks, degree);
  u->n_full = u->kv.num_basis();
  u->n = u->n_full - 2;
  if (u->n < 1) throw std::invalid_argument("space: no interior degrees of freedom");
  u->h_min = min_span(breaks);
  u->h_max = max_span(breaks);
  u->M = assemble_univariate(u->kv, UnivariateForm::mass, quad_points_per_span).drop_ends();
  u->B = assemble_univariate(u->kv, UnivariateForm::biharmonic, quad_points_per_span).drop_ends();
  u->G = assemble_univariate(u->kv, UnivariateForm::grad, quad_points_per_span).drop_ends();
  u->split = build_direction_split(u->kv, u->M, u->B, force_dense_nullspace);
  return u;
}

/// Tensor-product space of one level; directions may share univariate data.
/// Degree >= 2 keeps the discrete space H2-conforming (C^1 at least).
struct TensorSpace {
  int d = 2;
  std::array<std::shared_ptr<const UnivariateLevelSpace>, 3> dir;

  TensorShape shape() const {
    TensorShape s;
    s.d = d;
    for (int k = 0; k < d; ++k) s.n[k] = dir[k]->n;
    return s;
  }
  std::size_t dim() const { return shape().total(); }
  double h_min() const {
    double h = dir[0]->h_min;
    for (int k = 1; k < d; ++k) h = std::min(h, dir[k]->h_min);
    return h;
  }
  double h_max() const {
    double h = dir[0]->h_max;
    for (int k = 1; k < d; ++k) h = std::max(h, dir[k]->h_max);
    return h;
  }
};

inline TensorSpace make_tensor_space(int d,
                                     const std::shared_ptr<const UnivariateLevelSpace>& u) {
  if (d < 1 || d > 3) throw std::invalid_argument("tensor space: dimension must be 1, 2, or 3");
  if (u->p < 2)
    throw std::invalid_argument("tensor space: degree must be >= 2 for H2 conformity");
  TensorSpace t;
  t.d = d;
  for (int k = 0; k < d; ++k) t.dir[k] = u;
  return t;
}

}  // namespace igamg
