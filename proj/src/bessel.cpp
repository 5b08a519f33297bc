#include "orbitlab/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orbitlab/error.hpp"
#include "orbitlab/quadrature.hpp"

namespace orbitlab {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

struct Contour {
  double alpha;  // Im t of the shifted line
  double gap;    // pi/2 - alpha, the half width of the usable strip
};

Contour choose_contour(double r, double x) {
  const double gap_cap = std::min(0.25, 1.0 / (r + 1.0));
  const double saddle = r < x ? std::asin(r / x) : kHalfPi;
  const double alpha = std::min(saddle, kHalfPi - gap_cap);
  return {alpha, kHalfPi - alpha};
}

// Trapezoid sums of the scaled integrand and of its x-derivative with step h.
// The integrand at t and -t are conjugate, so only t >= 0 is summed.
BesselValue trapezoid(double r, double x, const Contour& c, double h, double offset = 0.0) {
  const double ca = std::cos(c.alpha), sa = std::sin(c.alpha);
  const double shift = r * (kHalfPi - c.alpha);  // e^{pi r / 2} e^{-r alpha}
  auto term = [&](double t, double weight, BesselValue& acc) {
    const double ch = std::cosh(t), sh = std::sinh(t);
    const double mag = std::exp(-x * ca * ch + shift + offset);
    const double ph = r * t - x * sa * sh;
    const double re = mag * std::cos(ph), im = mag * std::sin(ph);
    // cosh(t + i alpha) = ch ca + i sh sa
    acc.value += weight * re;
    acc.derivative -= weight * (ch * ca * re - sh * sa * im);
  };
  BesselValue sum;
  term(0.0, 0.5, sum);
  const double lead0 = -x * ca + shift;
  for (long j = 1;; ++j) {
    const double t = j * h;
    const double lead = -x * ca * std::cosh(t) + shift;
    if (lead + offset < -745.0) break;
    term(t, 1.0, sum);
    if (lead < lead0 - 46.0) break;
  }
  sum.value *= h;
  sum.derivative *= h;
  return sum;
}

}  // namespace

namespace {

// Sums with the integrand multiplied by e^{offset}.
BesselValue converged_sum(double r, double x, const Contour& c, double offset, const BesselOptions& opt) {
  // Aliasing error of the trapezoid rule ~ exp(-2 pi gap / h).
  double h = 2.0 * 3.14159265358979323846 * c.gap / 40.0;
  BesselValue prev = trapezoid(r, x, c, h, offset);
  for (int it = 0; it < opt.max_halvings; ++it) {
    h *= 0.5;
    const BesselValue cur = trapezoid(r, x, c, h, offset);
    const double sv = std::max(std::abs(cur.value), 1e-300);
    const double sd = std::max(std::abs(cur.derivative), 1e-300);
    if (std::abs(cur.value - prev.value) <= opt.tol * sv &&
        std::abs(cur.derivative - prev.derivative) <= opt.tol * sd)
      return cur;
    prev = cur;
  }
  throw NumericalError("K_ir(" + std::to_string(x) + ") with r = " + std::to_string(r) +
                       " did not reach the requested accuracy");
}

}  // namespace

BesselValue bessel_K_imag_order_log_scaled(double r, double x, double* log_scale, const BesselOptions& opt) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("K_ir needs x > 0");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("K_ir needs r >= 0");
  const Contour c = choose_contour(r, x);
  const double offset = x * std::cos(c.alpha) - r * (kHalfPi - c.alpha);
  const BesselValue v = converged_sum(r, x, c, offset, opt);
  if (log_scale) *log_scale = -offset - kHalfPi * r;
  return v;
}

BesselValue bessel_K_imag_order_with_derivative(double r, double x, bool scaled, const BesselOptions& opt) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("K_ir needs x > 0");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("K_ir needs r >= 0");
  const Contour c = choose_contour(r, x);
  // Aliasing error of the trapezoid rule ~ exp(-2 pi gap / h).
  double h = 2.0 * 3.14159265358979323846 * c.gap / 40.0;
  BesselValue prev = trapezoid(r, x, c, h);
  for (int it = 0; it < opt.max_halvings; ++it) {
    h *= 0.5;
    const BesselValue cur = trapezoid(r, x, c, h);
    const double sv = std::max(std::abs(cur.value), 1e-300);
    const double sd = std::max(std::abs(cur.derivative), 1e-300);
    if (std::abs(cur.value - prev.value) <= opt.tol * sv &&
        std::abs(cur.derivative - prev.derivative) <= opt.tol * sd) {
      if (scaled) return cur;
      const double f = std::exp(-kHalfPi * r);
      return {cur.value * f, cur.derivative * f};
    }
    prev = cur;
  }
  throw NumericalError("K_ir(" + std::to_string(x) + ") with r = " + std::to_string(r) +
                       " did not reach the requested accuracy");
}

double bessel_K_imag_order(double r, double x, bool scaled, const BesselOptions& opt) {
  return bessel_K_imag_order_with_derivative(r, x, scaled, opt).value;
}

double bessel_K_imag_order_real_axis(double r, double x) {
  if (!(x > 0.0)) throw DomainError("K_ir needs x > 0");
  // e^{-x cosh t} < 1e-40 e^{-x} past T
  const long double T = std::acosh(1.0 + 92.0 / x);
  const int panels = static_cast<int>(std::ceil(T * (1.0 + r + x) * 2.0)) + 8;
  const auto& g = gauss_legendre(20);
  long double sum = 0.0L;
  const long double w = T / panels;
  for (int p = 0; p < panels; ++p)
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const long double t = w * (p + 0.5L * (g.nodes[q] + 1.0L));
      sum += 0.5L * w * g.weights[q] * std::exp(-(long double)x * std::cosh(t)) * std::cos((long double)r * t);
    }
  return static_cast<double>(sum);
}

double bessel_ode_residual(double r, double x) {
  if (!(x > 0.0)) throw DomainError("ODE residual needs x > 0");
  const double h = 1e-3 * x;
  auto K = [&](double t) { return bessel_K_imag_order(r, t, true); };
  const double k0 = K(x), kp = K(x + h), km = K(x - h), kpp = K(x + 2 * h), kmm = K(x - 2 * h);
  const double d1 = (-kpp + 8 * kp - 8 * km + kmm) / (12 * h);
  const double d2 = (-kpp + 16 * kp - 30 * k0 + 16 * km - kmm) / (12 * h * h);
  const double res = x * x * d2 + x * d1 - (x * x - r * r) * k0;
  const double scale = x * x * std::abs(d2) + x * std::abs(d1) + std::abs(x * x - r * r) * std::abs(k0);
  return std::abs(res) / scale;
}

}  // namespace orbitlab
