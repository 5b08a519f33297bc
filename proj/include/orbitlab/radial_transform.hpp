#pragma once

// Three-dimensional Fourier transform of a radial profile,
//   F(R) = (2pi)^{-3} int_{R^3} f(|xi|) e^{-i x.xi} dxi
//        = 1/(2 pi^2 R) int_0^inf f(rho) rho sin(rho R) drho,
// tabulated with one DST-I and read back by 4-point Lagrange interpolation.

#include <functional>
#include <vector>

namespace orbitlab {

class RadialTransform {
 public:
  // f must vanish (to double precision) for rho >= support. `feature` is the
  // smallest length scale of f; x_max the largest |x| at which F is needed.
  RadialTransform(const std::function<double(double)>& f, double support, double feature, double x_max,
                  int pad = 32);

  double operator()(double R) const;
  double at_zero() const { return table_[0]; }
  double x_max() const { return R_max_; }
  double grid_step() const { return dR_; }
  // Largest R with |F(R)| > tol * max|F| inside the table.
  double decay_radius(double tol) const;

 private:
  std::vector<double> table_;
  double dR_ = 0.0;
  double R_max_ = 0.0;
};

// Reference quadrature of the same integral (composite Gauss-Legendre).
double radial_transform_reference(const std::function<double(double)>& f, double support, double R,
                                  int panels = 400);

}  // namespace orbitlab
