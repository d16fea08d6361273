#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace igamg {

/// Analytic geometry map G: [0,1]^d -> Omega. Row-major d x d Jacobian
/// J(a,b) = d x_a / d xi_b; hessian(comp) returns the d x d matrix of second
/// parametric derivatives of physical component `comp`.
class Geometry {
 public:
  virtual ~Geometry() = default;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual bool is_identity() const { return false; }
  virtual void eval(const double* xi, double* x) const = 0;
  virtual void jacobian(const double* xi, double* J) const = 0;
  virtual void hessian(const double* xi, int comp, double* H) const = 0;
};

class IdentityMap final : public Geometry {
 public:
  explicit IdentityMap(int d) : d_(d) {}
  int dim() const override { return d_; }
  std::string name() const override { return d_ == 2 ? "unit-square" : "unit-cube"; }
  bool is_identity() const override { return true; }
  void eval(const double* xi, double* x) const override {
    for (int k = 0; k < d_; ++k) x[k] = xi[k];
  }
  void jacobian(const double*, double* J) const override {
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) J[a * d_ + b] = (a == b) ? 1.0 : 0.0;
  }
  void hessian(const double*, int, double* H) const override {
    for (int k = 0; k < d_ * d_; ++k) H[k] = 0.0;
  }

 private:
  int d_;
};

/// Quarter annulus with radii 1..2: G(xi, eta) = (1+xi)(cos(pi eta/2), sin(pi eta/2)).
class QuarterAnnulus2D final : public Geometry {
 public:
  int dim() const override { return 2; }
  std::string name() const override { return "quarter-annulus-2d"; }
  void eval(const double* xi, double* x) const override {
    const double r = 1.0 + xi[0], t = 0.5 * M_PI * xi[1];
    x[0] = r * std::cos(t);
    x[1] = r * std::sin(t);
  }
  void jacobian(const double* xi, double* J) const override {
    const double r = 1.0 + xi[0], t = 0.5 * M_PI * xi[1], w = 0.5 * M_PI;
    J[0] = std::cos(t);
    J[1] = -r * w * std::sin(t);
    J[2] = std::sin(t);
    J[3] = r * w * std::cos(t);
  }
  void hessian(const double* xi, int comp, double* H) const override {
    const double r = 1.0 + xi[0], t = 0.5 * M_PI * xi[1], w = 0.5 * M_PI;
    if (comp == 0) {
      H[0] = 0.0;
      H[1] = H[2] = -w * std::sin(t);
      H[3] = -r * w * w * std::cos(t);
    } else {
      H[0] = 0.0;
      H[1] = H[2] = w * std::cos(t);
      H[3] = -r * w * w * std::sin(t);
    }
  }
};

/// Quarter annulus extruded in z with a 30-degree twist over the unit height:
/// G(xi, eta, zeta) = ((1+xi) cos(phi), (1+xi) sin(phi), zeta),
/// phi = pi eta / 2 + omega zeta, omega = pi/6.
class TwistedAnnulus3D final : public Geometry {
 public:
  int dim() const override { return 3; }
  std::string name() const override { return "twisted-annulus-3d"; }
  void eval(const double* xi, double* x) const override {
    const double r = 1.0 + xi[0], phi = 0.5 * M_PI * xi[1] + kOmega * xi[2];
    x[0] = r * std::cos(phi);
    x[1] = r * std::sin(phi);
    x[2] = xi[2];
  }
  void jacobian(const double* xi, double* J) const override {
    const double r = 1.0 + xi[0], phi = 0.5 * M_PI * xi[1] + kOmega * xi[2];
    const double c = std::cos(phi), s = std::sin(phi), w = 0.5 * M_PI;
    J[0] = c;
    J[1] = -r * w * s;
    J[2] = -r * kOmega * s;
    J[3] = s;
    J[4] = r * w * c;
    J[5] = r * kOmega * c;
    J[6] = 0.0;
    J[7] = 0.0;
    J[8] = 1.0;
  }
  void hessian(const double* xi, int comp, double* H) const override {
    const double r = 1.0 + xi[0], phi = 0.5 * M_PI * xi[1] + kOmega * xi[2];
    const double c = std::cos(phi), s = std::sin(phi), w = 0.5 * M_PI;
    for (int k = 0; k < 9; ++k) H[k] = 0.0;
    if (comp == 0) {
      H[1] = H[3] = -w * s;
      H[2] = H[6] = -kOmega * s;
      H[4] = -r * w * w * c;
      H[5] = H[7] = -r * w * kOmega * c;
      H[8] = -r * kOmega * kOmega * c;
    } else if (comp == 1) {
      H[1] = H[3] = w * c;
      H[2] = H[6] = kOmega * c;
      H[4] = -r * w * w * s;
      H[5] = H[7] = -r * w * kOmega * s;
      H[8] = -r * kOmega * kOmega * s;
    }
  }

 private:
  static constexpr double kOmega = M_PI / 6.0;
};

inline std::shared_ptr<const Geometry> make_geometry(const std::string& name) {
  if (name == "unit-square") return std::make_shared<IdentityMap>(2);
  if (name == "unit-cube") return std::make_shared<IdentityMap>(3);
  if (name == "quarter-annulus-2d") return std::make_shared<QuarterAnnulus2D>();
  if (name == "twisted-annulus-3d") return std::make_shared<TwistedAnnulus3D>();
  throw std::invalid_argument("unknown geometry: " + name);
}

/// Damped Newton inversion of the geometry map, xi0 in [0,1]^d as start.
inline bool invert_geometry(const Geometry& g, const double* x, double* xi, double tol = 1e-12,
                            int max_iters = 50) {
  const int d = g.dim();
  Eigen::VectorXd r(d), step(d), xi_try(d);
  Eigen::MatrixXd J(d, d);
  Eigen::Map<Eigen::VectorXd> xiv(xi, d);
  Eigen::Map<const Eigen::VectorXd> xv(x, d);

  const auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& out) {
    double Gx[3];
    g.eval(q.data(), Gx);
    for (int k = 0; k < d; ++k) out[k] = Gx[k] - xv[k];
  };
  residual(xiv, r);
  for (int it = 0; it < max_iters; ++it) {
    if (r.norm() <= tol) return true;
    double Jr[9];
    g.jacobian(xiv.data(), Jr);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) J(a, b) = Jr[a * d + b];
    step = J.partialPivLu().solve(r);
    double damp = 1.0;
    for (int half = 0; half < 30; ++half) {
      xi_try = xiv - damp * step;
      Eigen::VectorXd r_try(d);
      residual(xi_try, r_try);
      if (r_try.norm() < r.norm()) {
        xiv = xi_try;
        r = r_try;
        break;
      }
      damp *= 0.5;
    }
  }
  return r.norm() <= tol;
}

}  // namespace igamg
