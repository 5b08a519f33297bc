#pragma once

// Coadjoint orbits of sl(2,R)*. In orthonormal coordinates the level-L orbit
// is the one-sheeted hyperboloid xi1^2 + xi2^2 - xi3^2 = 2 L^2 (Casimir c = L^2),
// parametrised by xi3 = zeta and (xi1, xi2) = rho(zeta) (cos phi, sin phi),
// rho = sqrt(zeta^2 + 2 L^2). The canonical measure (KKS area / 2pi) is
//   d omega = d zeta d phi / (2 pi sqrt2)
// on every level, including the nilcone L = 0.

#include <string>
#include <vector>

#include "orbitlab/lie_sl2.hpp"
#include "orbitlab/symbols.hpp"

namespace orbitlab {

struct CoadjointOrbit {
  enum class Kind { TemperedPrincipal, NilpotentRegular };
  Kind kind = Kind::TemperedPrincipal;
  double level = 0.0;  // r for principal series (scaled by h), 0 on the nilcone
  int dim_half = 1;
  // Nilcone only: +1 / -1 selects one nappe, 0 means the whole cone.
  int sheet = 0;

  double casimir_level() const { return level * level; }
  bool contains(const Covector& xi, double tol = 1e-10) const;
  Vec3 point(double zeta, double phi) const;  // orthonormal coordinates
};

CoadjointOrbit orbit_of_principal_series(double r);
CoadjointOrbit nilcone(int sheet = 0);
CoadjointOrbit scale_orbit(const CoadjointOrbit& o, double hbar);

inline constexpr double kOrbitMeasure = 0.11253953951963826;  // 1 / (2 pi sqrt2)

struct OrbitQuadrature {
  std::vector<Covector> nodes;
  std::vector<double> weights;
  CoadjointOrbit target;
  double zeta_lo = 0.0, zeta_hi = 0.0;
  int zeta_panels = 0, gauss_order = 0, phi_points = 0;
  std::string describe() const;
};

// Gauss-Legendre panels in zeta, trapezoid in phi.
OrbitQuadrature make_orbit_quadrature(const CoadjointOrbit& o, double zeta_lo, double zeta_hi, int panels,
                                      int phi_points, int gauss_order = 8);

struct OrbitIntegral {
  cplx value;
  double last_change = 0.0;  // relative change of the last refinement
  int refinements = 0;
  OrbitQuadrature final_rule;
};

struct OrbitIntegralOptions {
  double rel_tol = 1e-3;
  double abs_tol = 1e-15;
  int max_refinements = 8;
  // zeta window; taken from the symbol support when lo >= hi
  double zeta_lo = 0.0, zeta_hi = 0.0;
};

OrbitIntegral orbit_integral_detailed(const Symbol& a, const CoadjointOrbit& o, const OrbitIntegralOptions& opt = {});
double orbit_integral(const Symbol& a, const CoadjointOrbit& o);

// Euclidean distance of xi to the nilcone.
double distance_to_nilcone(const Vec3& xi_ortho);

// |xi0| = 1 on the nilcone. The seed (orthonormal coordinates) picks the
// direction; the default gives the covector dual to E, sign = -1 the other nappe.
Covector nilpotent_regular_point(int sign = +1);
Covector nilpotent_regular_point(const Vec3& seed, int sign);

struct Sl2Triple {
  AlgebraVector h, e, f;
};

// Standard triple with e corresponding to xi0 under the trace form.
Sl2Triple sl2_triple_through(const Covector& xi0);
AlgebraVector stabilizer_generator(const Covector& xi0);

}  // namespace orbitlab
