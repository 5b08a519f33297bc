#pragma once

// Modified Bessel function of imaginary order, K_{ir}(x), x > 0, r >= 0.
//
// K_{ir}(x) = 1/2 int_R exp(-x cosh t + i r t) dt. The line is shifted to
// Im t = alpha (|alpha| < pi/2), where the integrand decays doubly
// exponentially and the cancellation that plagues the real axis for r > x
// disappears; the shifted integral is summed by the trapezoid rule.

namespace orbitlab {

struct BesselOptions {
  double tol = 1e-10;  // requested relative accuracy
  int max_halvings = 6;
};

// e^{pi r / 2} K_{ir}(x) when `scaled`, otherwise K_{ir}(x).
double bessel_K_imag_order(double r, double x, bool scaled = false, const BesselOptions& opt = {});

struct BesselValue {
  double value = 0.0;
  double derivative = 0.0;  // d/dx
};
// Value and x-derivative from the same contour sum (the derivative integrand
// carries an extra -cosh t).
BesselValue bessel_K_imag_order_with_derivative(double r, double x, bool scaled = false,
                                                const BesselOptions& opt = {});

// K_{ir}(x) = value * exp(*log_scale), for x where K itself underflows.
BesselValue bessel_K_imag_order_log_scaled(double r, double x, double* log_scale, const BesselOptions& opt = {});

// Integral over the real axis, int_0^inf e^{-x cosh t} cos(r t) dt, by
// Gauss-Legendre panels in long double. Independent check for modest r.
double bessel_K_imag_order_real_axis(double r, double x);

// |x^2 K'' + x K' - (x^2 - r^2) K| over the sum of the term sizes, with the
// derivatives from a 5-point stencil of step 1e-3 x on the scaled K.
double bessel_ode_residual(double r, double x);

}  // namespace orbitlab
