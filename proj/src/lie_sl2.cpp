#include "orbitlab/lie_sl2.hpp"

#include "orbitlab/error.hpp"

#include <cmath>
#include <sstream>

namespace orbitlab {

namespace {

Mat3 make_basis_to_ortho() {
  // x1 = sqrt2 cH, x2 = (cE + cF)/sqrt2, x3 = (cE - cF)/sqrt2
  Mat3 m;
  m << kSqrt2, 0, 0,
       0, 1 / kSqrt2, 1 / kSqrt2,
       0, 1 / kSqrt2, -1 / kSqrt2;
  return m;
}

Mat3 make_dual_to_ortho() {
  // xi1 = etaH/sqrt2, xi2 = (etaE + etaF)/sqrt2, xi3 = (etaE - etaF)/sqrt2
  Mat3 m;
  m << 1 / kSqrt2, 0, 0,
       0, 1 / kSqrt2, 1 / kSqrt2,
       0, 1 / kSqrt2, -1 / kSqrt2;
  return m;
}

// sinh(s)/s and cosh(s) for s^2 = lam2, valid for either sign of lam2.
void cosh_sinhc(double lam2, double& ch, double& shc) {
  if (std::abs(lam2) < 1e-6) {
    ch = 1 + lam2 / 2 + lam2 * lam2 / 24;
    shc = 1 + lam2 / 6 + lam2 * lam2 / 120;
  } else if (lam2 > 0) {
    const double s = std::sqrt(lam2);
    ch = std::cosh(s);
    shc = std::sinh(s) / s;
  } else {
    const double s = std::sqrt(-lam2);
    ch = std::cos(s);
    shc = std::sin(s) / s;
  }
}

}  // namespace

const Mat3& basis_to_ortho() {
  static const Mat3 m = make_basis_to_ortho();
  return m;
}

const Mat3& dual_to_ortho() {
  static const Mat3 m = make_dual_to_ortho();
  return m;
}

// ---------------------------------------------------------------------------

AlgebraVector AlgebraVector::from_matrix(const Mat2& m) {
  return AlgebraVector(0.5 * (m(0, 0) - m(1, 1)), m(0, 1), m(1, 0));
}

AlgebraVector AlgebraVector::from_ortho(const Vec3& x) {
  return AlgebraVector(Vec3(basis_to_ortho().inverse() * x));
}

Mat2 AlgebraVector::matrix() const {
  Mat2 m;
  m << c_[0], c_[1], c_[2], -c_[0];
  return m;
}

Vec3 AlgebraVector::ortho() const { return basis_to_ortho() * c_; }

AlgebraVector bracket(const AlgebraVector& x, const AlgebraVector& y) {
  const Mat2 a = x.matrix(), b = y.matrix();
  return AlgebraVector::from_matrix(a * b - b * a);
}

// ---------------------------------------------------------------------------

Covector Covector::from_ortho(const Vec3& xi) {
  return Covector(Vec3(dual_to_ortho().inverse() * xi));
}

Covector Covector::dual_of(const AlgebraVector& x) {
  const Vec3& c = x.coords();
  return Covector(2 * c[0], c[2], c[1]);
}

Vec3 Covector::ortho() const { return dual_to_ortho() * eta_; }

Mat2 Covector::matrix() const {
  Mat2 m;
  m << eta_[0] / 2, eta_[2], eta_[1], -eta_[0] / 2;
  return m;
}

double Covector::casimir() const { return eta_[0] * eta_[0] / 4 + eta_[1] * eta_[2]; }

AlgebraVector Covector::to_algebra() const { return AlgebraVector::from_matrix(matrix()); }

double pairing(const AlgebraVector& x, const Covector& xi) { return x.coords().dot(xi.coords()); }

// ---------------------------------------------------------------------------

GroupMatrix::GroupMatrix(const Mat2& m, double tol) : m_(m) {
  const double det = m.determinant();
  if (!(std::abs(det - 1) <= tol * std::max(1.0, m.squaredNorm()))) {
    std::ostringstream os;
    os << "GroupMatrix: determinant " << det << " is not 1";
    throw DomainError(os.str());
  }
}

GroupMatrix::GroupMatrix(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  *this = GroupMatrix(m);
}

GroupMatrix GroupMatrix::rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 m;
  m << c, s, -s, c;
  GroupMatrix g;
  g.m_ = m;
  return g;
}

GroupMatrix GroupMatrix::inverse() const {
  GroupMatrix g;
  g.m_ << m_(1, 1), -m_(0, 1), -m_(1, 0), m_(0, 0);
  return g;
}

GroupMatrix GroupMatrix::operator*(const GroupMatrix& o) const {
  GroupMatrix g;
  g.m_ = m_ * o.m_;
  // Products of unimodular matrices drift only at rounding level; renormalise
  // so that long chains keep det = 1.
  const double det = g.m_.determinant();
  if (std::abs(det - 1) > 1e-14) g.m_ /= std::sqrt(std::abs(det));
  return g;
}

GroupMatrix exp_map(const AlgebraVector& x) {
  const Vec3& c = x.coords();
  const double lam2 = c[0] * c[0] + c[1] * c[2];  // = -det(x)
  double ch, shc;
  cosh_sinhc(lam2, ch, shc);
  Mat2 m = ch * Mat2::Identity() + shc * x.matrix();
  const double det = m.determinant();
  m /= std::sqrt(det);
  return GroupMatrix(m, 1e-9);
}

AlgebraVector log_map(const GroupMatrix& g) {
  const double half_tr = 0.5 * g.matrix().trace();
  if (half_tr <= -1) throw DomainError("log_map: trace <= -2 (outside principal branch)");
  double lam2;
  if (half_tr >= 1) {
    const double s = std::acosh(half_tr);
    lam2 = s * s;
  } else {
    const double s = std::acos(half_tr);
    lam2 = -s * s;
  }
  double ch, shc;
  cosh_sinhc(lam2, ch, shc);
  const Mat2 x = (g.matrix() - half_tr * Mat2::Identity()) / shc;
  return AlgebraVector::from_matrix(x);
}

Mat3 adjoint(const GroupMatrix& g) {
  const Mat2& m = g.matrix();
  const Mat2 mi = g.inverse().matrix();
  Mat3 ad;
  const AlgebraVector basis[3] = {kH, kE, kF};
  for (int j = 0; j < 3; ++j)
    ad.col(j) = AlgebraVector::from_matrix(m * basis[j].matrix() * mi).coords();
  return ad;
}

Mat3 coadjoint(const GroupMatrix& g) { return adjoint(g.inverse()).transpose(); }

Mat3 ad_matrix(const AlgebraVector& x) {
  Mat3 ad;
  const AlgebraVector basis[3] = {kH, kE, kF};
  for (int j = 0; j < 3; ++j) ad.col(j) = bracket(x, basis[j]).coords();
  return ad;
}

AlgebraVector apply_adjoint(const GroupMatrix& g, const AlgebraVector& x) {
  return AlgebraVector::from_matrix(g.matrix() * x.matrix() * g.inverse().matrix());
}

Covector apply_coadjoint(const GroupMatrix& g, const Covector& xi) {
  return Covector(Vec3(coadjoint(g) * xi.coords()));
}

double haar_jacobian(const AlgebraVector& x, double radius) {
  if (x.norm() > radius) {
    std::ostringstream os;
    os << "haar_jacobian: |x| = " << x.norm() << " exceeds exponential-chart radius " << radius;
    throw DomainError(os.str());
  }
  // (1 - e^{-A})/A = sum_k (-A)^k / (k+1)!
  const Mat3 a = ad_matrix(x);
  Mat3 term = Mat3::Identity();
  Mat3 sum = Mat3::Identity();
  for (int k = 1; k < 60; ++k) {
    term = (-a * term) / double(k + 1);
    sum += term;
    if (term.norm() < 1e-18 * sum.norm()) break;
  }
  return sum.determinant();
}

GroupNorms norms(const GroupMatrix& g) {
  const Mat3& bo = basis_to_ortho();
  const Mat3& dO = dual_to_ortho();
  const Mat3 ad_o = bo * adjoint(g) * bo.inverse();
  const Mat3 coad_o = dO * coadjoint(g) * dO.inverse();
  Eigen::JacobiSVD<Mat3> s1(ad_o), s2(coad_o);
  return {g.matrix().norm(), s1.singularValues()[0], s2.singularValues()[0]};
}

}  // namespace orbitlab
