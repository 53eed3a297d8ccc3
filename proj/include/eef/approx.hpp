#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

#include "eef/common.hpp"

// Convex surrogate bounds used by the iterative approximation engine. Every
// bound agrees with the function it replaces in value and gradient at the
// expansion point and bounds it globally on the stated domain, so replacing a
// constraint by its surrogate shrinks the feasible set while keeping the
// current iterate feasible.
namespace eef::approx {

// x1*x2 <= 0.5*(lambda*x1^2 + x2^2/lambda) for x1,x2,lambda > 0;
// tight when x2/x1 = lambda.
inline double bilinear_upper(double x1, double x2, double lambda) {
  if (x1 <= 0 || x2 <= 0 || lambda <= 0) throw ArgumentError("bilinear_upper: positive inputs required");
  return 0.5 * (lambda * x1 * x1 + x2 * x2 / lambda);
}

inline double bilinear_lambda(double x1p, double x2p) {
  if (x1p <= 0 || x2p <= 0) throw ArgumentError("bilinear_lambda: positive inputs required");
  return x2p / x1p;
}

// x1/x2 <= 0.5*(lambda*x1^2 + 1/(lambda*x2^2)); tight at lambda = 1/(x1p*x2p).
inline double ratio_upper(double x1, double x2, double lambda) {
  if (x1 <= 0 || x2 <= 0 || lambda <= 0) throw ArgumentError("ratio_upper: positive inputs required");
  return 0.5 * (lambda * x1 * x1 + 1.0 / (lambda * x2 * x2));
}

inline double ratio_lambda(double x1p, double x2p) {
  if (x1p <= 0 || x2p <= 0) throw ArgumentError("ratio_lambda: positive inputs required");
  return 1.0 / (x1p * x2p);
}

// Cone-ready form of ratio_upper(x1,x2;lambda) <= y over an auxiliary z:
//   0.5*(lambda*x1^2 + z^2/lambda) <= y   and   1 <= x2*z.
struct RatioBoundForm {
  double lambda = 1.0;
  bool member(double x1, double x2, double z, double y, double tol = 0.0) const {
    return 0.5 * (lambda * x1 * x1 + z * z / lambda) <= y + tol && x2 * z + tol >= 1.0;
  }
};

inline RatioBoundForm ratio_bound_form(double x1p, double x2p) {
  return RatioBoundForm{ratio_lambda(x1p, x2p)};
}

// Linear upper bound of -(x^H A x)/z around (xp, zp) for A PSD, z > 0:
//   (xp^H A xp / zp^2) z - 2 Re(xp^H A x)/zp.
inline double quad_over_lin_upper(const Eigen::VectorXcd& x, double z, const Eigen::VectorXcd& xp,
                                  double zp, const Eigen::MatrixXcd& A) {
  if (z <= 0 || zp <= 0) throw ArgumentError("quad_over_lin_upper: denominators must be positive");
  if (A.rows() != A.cols() || A.rows() != x.size() || xp.size() != x.size())
    throw ArgumentError("quad_over_lin_upper: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw ArgumentError("quad_over_lin_upper: matrix must be positive semidefinite");
  double quad_p = (xp.adjoint() * A * xp)(0, 0).real();
  double cross = (xp.adjoint() * A * x)(0, 0).real();
  return quad_p / (zp * zp) * z - 2.0 * cross / zp;
}

inline double quad_over_lin_upper(double x, double z, double xp, double zp, double a = 1.0) {
  Eigen::VectorXcd xv(1), xpv(1);
  xv << x;
  xpv << xp;
  Eigen::MatrixXcd A(1, 1);
  A << a;
  return quad_over_lin_upper(xv, z, xpv, zp, A);
}

// log x <= log xp - 1 + x/xp.
inline double log_upper(double x, double xp) {
  if (x <= 0 || xp <= 0) throw ArgumentError("log_upper: positive inputs required");
  return std::log(xp) - 1.0 + x / xp;
}

// -(x^m) <= (m-1)*xp^m - m*xp^(m-1)*x for m < 0 or m > 1 (concave -x^m).
inline double power_upper(double x, double xp, double m) {
  if (x <= 0 || xp <= 0) throw ArgumentError("power_upper: positive inputs required");
  if (m >= 0.0 && m <= 1.0) throw ArgumentError("power_upper: exponent must satisfy m < 0 or m > 1");
  return (m - 1.0) * std::pow(xp, m) - m * std::pow(xp, m - 1.0) * x;
}

// Concave lower bound of log x around xp:
//   log x >= log xp + 2 - 2 sqrt(xp)/sqrt(x),
// with the cone certificate for  log xp + 2 - 2 sqrt(xp)/sqrt(x) >= y :
//   xi^2 <= x   and   ||(2 xp^{1/4}, log xp + 2 - y, xi)|| <= log xp + 2 - y + xi.
struct LogLowerBound {
  double xp = 1.0;

  double value(double x) const {
    if (x <= 0) throw ArgumentError("LogLowerBound: positive argument required");
    return std::log(xp) + 2.0 - 2.0 * std::sqrt(xp) / std::sqrt(x);
  }

  bool cone_member(double x, double y, double xi, double tol = 0.0) const {
    if (xi * xi > x + tol) return false;
    double head = std::log(xp) + 2.0 - y + xi;
    double a = 2.0 * std::pow(xp, 0.25);
    double b = std::log(xp) + 2.0 - y;
    return std::sqrt(a * a + b * b + xi * xi) <= head + tol;
  }

  // Canonical witness xi = sqrt(x).
  bool cone_member(double x, double y, double tol = 0.0) const {
    if (x <= 0) return false;
    return cone_member(x, y, std::sqrt(x), tol);
  }
};

inline LogLowerBound log_lower_bound(double xp) {
  if (xp <= 0) throw ArgumentError("log_lower_bound: positive expansion point required");
  return LogLowerBound{xp};
}

// Two-cone certificate for x^2 / sqrt(y) <= t over x real, y > 0:
//   ||(2x, t - v)|| <= t + v   (x^2 <= t v)
//   ||(2v, y - 1)|| <= y + 1   (v^2 <= y)
// Membership over some v >= 0 is equivalent to x^2/sqrt(y) <= t.
struct QuadOverSqrtForm {
  static bool member(double x, double y, double t, double v, double tol = 0.0) {
    double h1 = t + v;
    if (std::hypot(2.0 * x, t - v) > h1 + tol) return false;
    double h2 = y + 1.0;
    return std::hypot(2.0 * v, y - 1.0) <= h2 + tol;
  }

  // Canonical witness v = sqrt(y).
  static bool member(double x, double y, double t, double tol = 0.0) {
    if (y <= 0) return false;
    return member(x, y, t, std::sqrt(y), tol);
  }
};

}  // namespace eef::approx
