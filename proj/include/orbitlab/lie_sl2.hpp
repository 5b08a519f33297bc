#pragma once

// Exact kernels for sl(2,R) and SL(2,R).
//
// Coordinates. An AlgebraVector stores (c_H, c_E, c_F) in the basis
//   H = [[1,0],[0,-1]],  E = [[0,1],[0,0]],  F = [[0,0],[1,0]].
// The Euclidean structure used for |x|, |xi|, Lebesgue measures and operator
// norms is the one in which
//   X1 = H/sqrt2,  X2 = (E+F)/sqrt2,  X3 = (E-F)/sqrt2
// is orthonormal (this is Gram-Schmidt of {H,E,F} under tr(x y^T)).
// X3 generates the maximal compact subgroup K = SO(2).
//
// A Covector stores (eta_H, eta_E, eta_F) = (xi(H), xi(E), xi(F)), so the
// pairing is <x, xi> = sum c_i eta_i. Orthonormal dual coordinates are
// xi_i = <X_i, xi>. The character of the real Lie algebra is e^{i<x,xi>}.

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace orbitlab {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using cplx = std::complex<double>;

inline constexpr double kSqrt2 = 1.4142135623730950488;

class AlgebraVector {
 public:
  AlgebraVector() : c_(Vec3::Zero()) {}
  AlgebraVector(double cH, double cE, double cF) : c_(cH, cE, cF) {}
  explicit AlgebraVector(const Vec3& basis_coords) : c_(basis_coords) {}

  static AlgebraVector from_matrix(const Mat2& m);
  static AlgebraVector from_ortho(const Vec3& x);

  const Vec3& coords() const { return c_; }
  Mat2 matrix() const;
  Vec3 ortho() const;
  double norm() const { return ortho().norm(); }

  AlgebraVector operator+(const AlgebraVector& o) const { return AlgebraVector(Vec3(c_ + o.c_)); }
  AlgebraVector operator-(const AlgebraVector& o) const { return AlgebraVector(Vec3(c_ - o.c_)); }
  AlgebraVector operator*(double s) const { return AlgebraVector(Vec3(c_ * s)); }
  AlgebraVector operator-() const { return AlgebraVector(Vec3(-c_)); }

 private:
  Vec3 c_;
};

AlgebraVector bracket(const AlgebraVector& x, const AlgebraVector& y);

inline const AlgebraVector kH{1, 0, 0};
inline const AlgebraVector kE{0, 1, 0};
inline const AlgebraVector kF{0, 0, 1};

class Covector {
 public:
  Covector() : eta_(Vec3::Zero()) {}
  Covector(double eH, double eE, double eF) : eta_(eH, eE, eF) {}
  explicit Covector(const Vec3& dual_coords) : eta_(dual_coords) {}

  static Covector from_ortho(const Vec3& xi);
  // Covector xi with xi(y) = tr(x y) (trace-form identification).
  static Covector dual_of(const AlgebraVector& x);

  const Vec3& coords() const { return eta_; }
  Vec3 ortho() const;
  double norm() const { return ortho().norm(); }
  // Traceless matrix m(xi) with tr(x m(xi)) = <x, xi>.
  Mat2 matrix() const;
  // Casimir quadratic form, normalised so that the level-r orbit of the
  // spherical principal series is { c = r^2 }.
  double casimir() const;
  // The algebra element e with xi(y) = tr(e y).
  AlgebraVector to_algebra() const;

  Covector operator+(const Covector& o) const { return Covector(Vec3(eta_ + o.eta_)); }
  Covector operator-(const Covector& o) const { return Covector(Vec3(eta_ - o.eta_)); }
  Covector operator*(double s) const { return Covector(Vec3(eta_ * s)); }

 private:
  Vec3 eta_;
};

double pairing(const AlgebraVector& x, const Covector& xi);

// Casimir form on orthonormal dual coordinates.
inline double casimir_ortho(const Vec3& xi) {
  return 0.5 * (xi[0] * xi[0] + xi[1] * xi[1] - xi[2] * xi[2]);
}

class GroupMatrix {
 public:
  GroupMatrix() : m_(Mat2::Identity()) {}
  // Throws DomainError if |det - 1| > tol.
  explicit GroupMatrix(const Mat2& m, double tol = 1e-12);
  GroupMatrix(double a, double b, double c, double d);

  static GroupMatrix identity() { return GroupMatrix(); }
  static GroupMatrix diag(double lambda) { return GroupMatrix(lambda, 0, 0, 1 / lambda); }
  // k_theta = exp(theta (E - F)).
  static GroupMatrix rotation(double theta);
  static GroupMatrix unipotent(double u) { return GroupMatrix(1, u, 0, 1); }

  const Mat2& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  GroupMatrix inverse() const;
  GroupMatrix operator*(const GroupMatrix& o) const;
  GroupMatrix operator-() const { return GroupMatrix(-m_(0, 0), -m_(0, 1), -m_(1, 0), -m_(1, 1)); }

 private:
  Mat2 m_;
};

GroupMatrix exp_map(const AlgebraVector& x);
// Principal logarithm; valid for tr(g) > -2.
AlgebraVector log_map(const GroupMatrix& g);

// Ad(g) and Ad*(g) in (H,E,F) resp. (eta_H,eta_E,eta_F) coordinates.
Mat3 adjoint(const GroupMatrix& g);
Mat3 coadjoint(const GroupMatrix& g);
// ad(x) in (H,E,F) coordinates.
Mat3 ad_matrix(const AlgebraVector& x);

AlgebraVector apply_adjoint(const GroupMatrix& g, const AlgebraVector& x);
Covector apply_coadjoint(const GroupMatrix& g, const Covector& xi);

// Change of coordinates (H,E,F) -> orthonormal, and dual (eta) -> orthonormal.
const Mat3& basis_to_ortho();
const Mat3& dual_to_ortho();

inline constexpr double kExpDomainRadius = 2.0;

// det((1 - e^{-ad x}) / ad x), the density of Haar measure in exponential
// coordinates. Throws DomainError if |x| exceeds `radius`.
double haar_jacobian(const AlgebraVector& x, double radius = kExpDomainRadius);

struct GroupNorms {
  double frobenius;  // ||g||
  double ad;         // ||Ad(g)|| (largest singular value, orthonormal coords)
  double coad;       // ||Ad*(g)||
};
GroupNorms norms(const GroupMatrix& g);

}  // namespace orbitlab
