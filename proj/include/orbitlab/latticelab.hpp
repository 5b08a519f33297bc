#pragma once

// SL(2,Z) experiments: lattice points in Frobenius-norm balls, the packing
// constant of a bump on G, tube counts and the horocycle return ratio.
//
// B(e, rho) = { b in SL(2,R) : ||b - 1||_F <= rho }, which is symmetric.
// Haar measure is normalised by Lebesgue measure in orthonormal exponential
// coordinates at the identity; in Iwasawa coordinates g = n_x a_y k_theta it is
// (1/sqrt2) dx dy / y^2 dtheta. S is the one-parameter unipotent group
// fixing xi0 (without -1), measured by its parameter u, s_u = exp(u e) with e
// the nilpositive element of the triple through xi0.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/lie_sl2.hpp"

namespace orbitlab {

struct IntMatrix {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
  std::int64_t norm_sq() const { return a * a + b * b + c * c + d * d; }
  GroupMatrix group() const;
  bool operator==(const IntMatrix& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
  bool operator<(const IntMatrix& o) const;
};

inline constexpr double kLatticeTMax = 5000.0;

// Calls f for every gamma in SL(2,Z) with ||gamma||_F <= T, grouped by the
// bottom row (c, d) in lexicographic order. Throws ParameterError beyond the cap.
void for_each_lattice_element(double T, const std::function<void(const IntMatrix&)>& f);
long count_lattice(double T);
// Sorted lexicographically by (a, b, c, d).
std::vector<IntMatrix> enumerate_lattice_int(double T);
std::vector<GroupMatrix> enumerate_lattice(double T);

// psi(h) = amplitude * beta(||h - center||_F / radius), beta the standard bump.
struct PsiSpec {
  GroupMatrix center;
  double radius = 0.3;
  double amplitude = 1.0;
  double operator()(const GroupMatrix& h) const;
  // sup ||h|| over the support
  double norm_extent() const;
};

struct PackingReport {
  double value = 0.0;          // sup over the finer grid
  double coarse = 0.0;         // sup over the coarse grid
  double change = 0.0;         // (value - coarse) / value
  GroupMatrix argmax;
  long evaluations = 0;
  int max_terms = 0;           // most nonzero terms in one sum
  nlohmann::json to_json() const;
};

// sup over g = n_x a_y k_theta with (x, y) in the standard fundamental domain
// (y <= y_max, chosen past the support) and theta in [0, pi) of
// |sum_gamma psi(g gamma)|. `n` is the coarse grid size per axis; the fine
// grid doubles it.
PackingReport packing_constant(const PsiSpec& psi, int n = 12);

struct TubeSpec {
  Covector xi0 = Covector(0.0, 0.0, 1.0);  // dual to E under the trace form
  double rho = 0.1;
  GroupMatrix g;
  double T = 10.0;
  void validate() const;
  nlohmann::json to_json() const;
};

struct TubeCount {
  long pm_min = 0, pm_max = 0;          // gamma in B (+-S) g^-1 B
  long mod_center_min = 0, mod_center_max = 0;  // pairs {gamma, -gamma}, equal to the count over S
  long ambiguous = 0;
  long tested = 0;  // candidates passing the prefilter
  nlohmann::json to_json() const;
};

// Membership through gamma . B lambda  meeting  B xi0 with lambda = g xi0:
// on R^2 \ 0 the nilpotent orbit is { w } / +-, and the test minimises
// max(f_{w0}(+-p), f_{g w0}(gamma^-1 p)) over p, with
// f_w(p) = min { ||b - 1||_F : b w = p } in closed form.
TubeCount tube_count(const TubeSpec& spec, double margin_tol = 1e-9);
// Margin rho - min_p max(...) for one gamma; positive means member.
double tube_margin(const TubeSpec& spec, const GroupMatrix& gamma);

// Haar volume of B(e, rho); `n` angular nodes per axis.
double ball_volume(double rho, int n = 24);
// (1/sqrt2) * area(F) * pi by quadrature over the fundamental domain.
double fundamental_volume(int n = 16);
// |{ u : ||s_u||_F <= T }| = 2 sqrt(T^2 - 2)
double stabilizer_volume(double T);

struct ReturnRow {
  double T = 0.0;
  double C_T = 0.0;    // int over S cap G_T of the returns to B
  long count_min = 0, count_max = 0;  // gammas contributing
  double vol_S_T = 0.0, vol_B = 0.0, vol_X = 0.0;
  double ratio_min = 0.0, ratio_max = 0.0;
};

struct CountReport {
  std::vector<ReturnRow> rows;
  double rho = 0.0;
  double vol_X_change = 0.0;  // quadrature refinement
  nlohmann::json to_json() const;
  std::string csv() const;
};

// C_T(B, g) = sum_gamma |{ u : |u| <= sqrt(T^2 - 2), gamma g s_u in B }|,
// the time the S-orbit of the point of X above g spends in B. Ratio against
// vol(S cap G_T) vol(B) / vol(X).
CountReport ratner_ratio(const Covector& xi0, double rho, const GroupMatrix& g, const std::vector<double>& T_grid);

// Base point whose S-orbit is not closed for the default xi0: g infinity is
// the golden ratio conjugate.
GroupMatrix generic_base_point();

}  // namespace orbitlab
