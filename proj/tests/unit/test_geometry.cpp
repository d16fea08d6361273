#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "igamg/geometry.hpp"
#include "igamg/rng.hpp"

using namespace igamg;

namespace {

// central finite differences as an independent derivative oracle
void fd_jacobian(const Geometry& g, const double* xi, double* J, double h = 1e-6) {
  const int d = g.dim();
  double xp[3], xm[3], q[3];
  for (int b = 0; b < d; ++b) {
    for (int k = 0; k < d; ++k) q[k] = xi[k];
    q[b] = xi[b] + h;
    g.eval(q, xp);
    q[b] = xi[b] - h;
    g.eval(q, xm);
    for (int a = 0; a < d; ++a) J[a * d + b] = (xp[a] - xm[a]) / (2 * h);
  }
}

void fd_hessian(const Geometry& g, const double* xi, int comp, double* H, double h = 1e-4) {
  const int d = g.dim();
  double q[3], x1[3], x2[3], x3[3], x4[3];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      for (int k = 0; k < d; ++k) q[k] = xi[k];
      q[a] += h;
      q[b] += h;
      g.eval(q, x1);
      for (int k = 0; k < d; ++k) q[k] = xi[k];
      q[a] += h;
      q[b] -= h;
      g.eval(q, x2);
      for (int k = 0; k < d; ++k) q[k] = xi[k];
      q[a] -= h;
      q[b] += h;
      g.eval(q, x3);
      for (int k = 0; k < d; ++k) q[k] = xi[k];
      q[a] -= h;
      q[b] -= h;
      g.eval(q, x4);
      H[a * d + b] = (x1[comp] - x2[comp] - x3[comp] + x4[comp]) / (4 * h * h);
    }
}

}  // namespace

TEST_CASE("geometry factory resolves the benchmark names", "[geometry]") {
  CHECK(make_geometry("unit-square")->dim() == 2);
  CHECK(make_geometry("unit-square")->is_identity());
  CHECK(make_geometry("unit-cube")->dim() == 3);
  CHECK(make_geometry("quarter-annulus-2d")->dim() == 2);
  CHECK(make_geometry("twisted-annulus-3d")->dim() == 3);
  CHECK_THROWS(make_geometry("torus"));
}

TEST_CASE("analytic jacobians and hessians match finite differences", "[geometry]") {
  std::mt19937_64 rng(404);
  for (const char* name : {"quarter-annulus-2d", "twisted-annulus-3d"}) {
    const auto g = make_geometry(name);
    const int d = g->dim();
    for (int trial = 0; trial < 10; ++trial) {
      double xi[3] = {0, 0, 0};
      for (int k = 0; k < d; ++k) xi[k] = 0.05 + 0.9 * (0.5 * (uniform_pm1(rng) + 1.0));
      double J[9], Jfd[9], H[9], Hfd[9];
      g->jacobian(xi, J);
      fd_jacobian(*g, xi, Jfd);
      for (int k = 0; k < d * d; ++k) CHECK(std::abs(J[k] - Jfd[k]) < 5e-7);
      for (int comp = 0; comp < d; ++comp) {
        g->hessian(xi, comp, H);
        fd_hessian(*g, xi, comp, Hfd);
        for (int k = 0; k < d * d; ++k) CHECK(std::abs(H[k] - Hfd[k]) < 5e-5);
      }
    }
  }
}

TEST_CASE("jacobian determinant is positive on a sample grid", "[geometry]") {
  for (const char* name : {"unit-square", "unit-cube", "quarter-annulus-2d",
                           "twisted-annulus-3d"}) {
    const auto g = make_geometry(name);
    const int d = g->dim();
    const int s = 7;
    double J[9];
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < (d == 3 ? s : 1); ++k) {
          double xi[3] = {i / (s - 1.0), j / (s - 1.0), k / (s - 1.0)};
          g->jacobian(xi, J);
          if (d == 2) {
            CHECK(J[0] * J[3] - J[1] * J[2] > 0.0);
          } else {
            Eigen::Matrix3d Jm;
            for (int a = 0; a < 3; ++a)
              for (int b = 0; b < 3; ++b) Jm(a, b) = J[a * 3 + b];
            CHECK(Jm.determinant() > 0.0);
          }
        }
  }
}

TEST_CASE("newton inversion round-trips interior points", "[geometry]") {
  std::mt19937_64 rng(808);
  for (const char* name : {"quarter-annulus-2d", "twisted-annulus-3d"}) {
    const auto g = make_geometry(name);
    const int d = g->dim();
    for (int trial = 0; trial < 12; ++trial) {
      double xi_ref[3] = {0, 0, 0}, x[3], xi[3];
      for (int k = 0; k < d; ++k) xi_ref[k] = 0.05 + 0.9 * (0.5 * (uniform_pm1(rng) + 1.0));
      g->eval(xi_ref, x);
      for (int k = 0; k < d; ++k) xi[k] = 0.5;  // generic start
      REQUIRE(invert_geometry(*g, x, xi));
      for (int k = 0; k < d; ++k) CHECK(std::abs(xi[k] - xi_ref[k]) < 1e-9);
    }
  }
}

TEST_CASE("annulus maps the parameter square to the expected physical corners",
          "[geometry]") {
  const auto g = make_geometry("quarter-annulus-2d");
  double x[2];
  double c00[2] = {0, 0}, c10[2] = {1, 0}, c01[2] = {0, 1};
  g->eval(c00, x);
  CHECK(x[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(x[1] == Catch::Approx(0.0).margin(1e-14));
  g->eval(c10, x);
  CHECK(x[0] == Catch::Approx(2.0).margin(1e-14));
  g->eval(c01, x);
  CHECK(x[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(x[1] == Catch::Approx(1.0).margin(1e-14));
}
