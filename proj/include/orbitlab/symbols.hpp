#pragma once

// Symbols on the dual of sl(2,R), their Euclidean inverse Fourier transforms
//   a^v(x) = int a(xi) e^{-i<x,xi>} dxi,   dxi = dxi_Lebesgue / (2pi)^3,
// with x and xi in orthonormal coordinates, and the small-ball and Sobolev
// families used throughout.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbitlab/lie_sl2.hpp"
#include "orbitlab/radial_transform.hpp"

namespace orbitlab {

struct SupportDescriptor {
  enum class Kind { Ball, Effective, Global };
  Kind kind = Kind::Global;
  Vec3 center = Vec3::Zero();  // orthonormal coordinates
  double radius = 0.0;         // for Effective: where |a| < 1e-16 sup|a|
};

struct SymbolMeta {
  double order = 0.0;  // m; -inf for compactly supported bumps
  double delta = 0.0;
  SupportDescriptor support;
  std::optional<double> hbar;
  std::string spec;
  bool real = true;
  bool nonnegative = false;
};

// Provider of a^v.
class InverseFT {
 public:
  virtual ~InverseFT() = default;
  virtual cplx value(const Vec3& x) const = 0;
  // |x| beyond which |a^v| < tol * |a^v(0)|-scale.
  virtual double decay_radius(double tol) const = 0;
  virtual std::string kind() const = 0;
  // True when a^v(x) only depends on (x1^2 + x2^2, x3), i.e. a is K-invariant.
  virtual bool k_invariant() const { return false; }
  // Values at x = h (i, j, k) for i, j, k in [-M, M] (row-major, k fastest).
  virtual void on_grid(double h, int M, std::vector<cplx>& out) const;
};

class Symbol {
 public:
  using Eval = std::function<cplx(const Vec3&)>;  // argument in orthonormal coordinates

  Symbol() = default;
  Symbol(Eval eval, std::shared_ptr<const InverseFT> ift, SymbolMeta meta)
      : eval_(std::make_shared<Eval>(std::move(eval))), ift_(std::move(ift)), meta_(std::move(meta)) {}

  cplx operator()(const Covector& xi) const { return (*eval_)(xi.ortho()); }
  cplx at(const Vec3& xi_ortho) const { return (*eval_)(xi_ortho); }
  bool has_ift() const { return static_cast<bool>(ift_); }
  const InverseFT& ift() const;
  std::shared_ptr<const InverseFT> ift_ptr() const { return ift_; }
  const SymbolMeta& meta() const { return meta_; }
  SymbolMeta& meta() { return meta_; }
  bool valid() const { return static_cast<bool>(eval_); }
  // Largest |xi| on the (effective) support.
  double frequency_extent() const;

 private:
  std::shared_ptr<const Eval> eval_;
  std::shared_ptr<const InverseFT> ift_;
  SymbolMeta meta_;
};

// Radial profiles alpha(u), u = |xi - center| / scale.
struct BumpProfile {
  enum class Kind { Plateau, Gauss };
  Kind kind = Kind::Plateau;
  double sigma = 0.35;  // Gauss width in units of the ball radius
  double operator()(double u) const;
  // Square root profile (beta for the plateau bump).
  double sqrt_value(double u) const;
  // Radius beyond which the profile is < 1e-16 (1 for the plateau bump).
  double effective_radius() const;
  std::string name() const { return kind == Kind::Plateau ? "plateau" : "gauss"; }
};

// beta(u) = exp(1 - 1/(1-u^2)) on |u| < 1.
double standard_bump(double u);
// <xi>_r = (r^2 + |xi|^2)^{1/2}
double japanese_bracket(const Vec3& xi, double r = 1.0);

Symbol make_zero();
// A exp(-|xi - c|^2 / (2 s^2)); analytic inverse transform.
Symbol make_gaussian(const Vec3& center, double sigma, double amplitude = 1.0);
// f(|xi - c|) with f vanishing beyond `support`; inverse transform by the
// radial sine transform, tabulated up to |x| = x_max.
Symbol make_radial(const Vec3& center, std::function<double(double)> f, double support, double feature,
                   double x_max, SymbolMeta meta);

enum class SmallBallCentering {
  Centered,  // alpha((xi0 - xi) / h^delta): ball B(xi0, h^delta)
  Literal    // alpha(xi0 - xi / h^delta): ball B(h^delta xi0, h^delta)
};

Symbol make_small_ball(double hbar, const Covector& xi0, double delta, const BumpProfile& alpha = {},
                       SmallBallCentering centering = SmallBallCentering::Centered, double x_max = 0.0);

// Smooth taper of growing symbols far outside the frequency window in use.
struct Taper {
  double inner = 0.0;  // 1 on |xi| <= inner
  double outer = 0.0;  // 0 on |xi| >= outer
  bool active() const { return outer > inner && inner > 0.0; }
  double operator()(double rho) const;
  double plateau_value(double rho) const;
  // 1.25 xi_block + 0.5 and `ratio` times that; xi_block = largest |xi| of
  // the K-types kept in the interior block. At hbar = 1 there is no
  // semiclassical separation and a slower roll-off (ratio 3) is needed.
  static Taper for_block(double xi_block, double ratio = 1.5);
};

struct SobolevPair {
  Symbol b;
  Symbol a_inv;
};

// b = h^{-s} (h^{2(1-kappa)} + |xi|^2)^{s/2}, a_inv = 1/b, both times the taper.
SobolevPair make_sobolev(double hbar, double s, double kappa, const Taper& taper, double x_max = 0.0);
// Untapered pointwise values.
double sobolev_b(double hbar, double s, double kappa, double rho);
// h^{-s}... variant with <xi/h>_r: b^{s,r}(xi) = <xi/h>_r^s.
double sobolev_b_r(double hbar, double s, double r, double rho);

// 1 + |xi|^2 (the symbol quantizing to Delta at h = 1), tapered.
Symbol make_laplace_symbol(const Taper& taper, double x_max);
// The constant 1, tapered.
Symbol make_unit_symbol(const Taper& taper, double x_max);

Symbol sqrt_symbol(const Symbol& a);
Symbol act(const GroupMatrix& g, const Symbol& a);
// Average of a over the coadjoint K-orbits. Op(k_average(a)) is the diagonal
// part of Op(a).
Symbol k_average(const Symbol& a);
Symbol add(const Symbol& a, const Symbol& b);
Symbol scale(const Symbol& a, cplx c);
Symbol multiply(const Symbol& a, const Symbol& b);

// a^v as a callable.
std::function<cplx(const AlgebraVector&)> inverse_ft(const Symbol& a);

// Trapezoid transform of samples of `a` on a cube around the support,
// evaluated exactly (no interpolation) at points or on x-lattices.
class GridInverseFT : public InverseFT {
 public:
  GridInverseFT(const Symbol& a, int n = 64, double box_factor = 2.0);
  cplx value(const Vec3& x) const override;
  double decay_radius(double tol) const override;
  std::string kind() const override { return "grid"; }
  void on_grid(double h, int M, std::vector<cplx>& out) const override;
  // Largest |x| at which the samples resolve a^v.
  double reliable_radius() const { return reliable_; }

 private:
  Vec3 center_;
  double step_;
  int n_;
  std::vector<cplx> samples_;
  double reliable_;
  double decay_hint_;
};

// Forward transform a(xi) = int a^v(x) e^{i<x,xi>} dx (Lebesgue dx), by
// trapezoid over a cube of half-width L with spacing h.
cplx forward_ft(const InverseFT& ift, const Vec3& xi, double L, double h);

struct ClassReport {
  std::vector<int> orders;         // |alpha| for each entry below
  std::vector<Vec3> directions;    // derivative directions (unit, orthonormal coords)
  std::vector<std::vector<double>> constants;  // [hbar index][entry]
  std::vector<double> hbar_grid;
  bool pass = false;
  double max_variation = 0.0;  // largest growth C(h_small)/C(h_large) over entries
};

// Empirical S^m_delta membership of the family hbar -> a_hbar: samples
// |d^alpha a| by 5-point central differences along coordinate and diagonal
// directions for |alpha| <= 3 and reports sup |d^alpha a| h^{delta|alpha|} <xi>^{|alpha|-m}.
ClassReport estimate_class_membership(const std::function<Symbol(double)>& family, double m, double delta,
                                      const std::vector<double>& hbar_grid, int samples = 400,
                                      unsigned seed = 7);

}  // namespace orbitlab
