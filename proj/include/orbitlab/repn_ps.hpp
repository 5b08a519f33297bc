#pragma once

// Even spherical principal series pi_{ir} of SL(2,R), circle model.
//
// Functions on R^2 \ 0 with f(t v) = |t|^{-1-2ir} f(v), restricted to the
// unit circle; (pi(g) f)(v) = f(g^{-1} v); inner product (1/2pi) int dtheta.
// Orthonormal K-types e_k(theta) = e^{ik theta}, k even, and
// pi(k_theta) e_k = e^{ik theta} e_k.
//
// Even functions have period pi, so sampling uses the half circle
// theta_m = pi m / Np. A "sample_count" of N full-circle points corresponds to
// Np = N/2 half-circle samples.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "orbitlab/lie_sl2.hpp"

namespace orbitlab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class PrincipalSeries {
 public:
  // K_max must be even and >= 2. sample_count = 0 picks 4 K_max.
  PrincipalSeries(double r, int K_max, int sample_count = 0, double g_norm_limit = 1e3);

  double r() const { return r_; }
  int K_max() const { return K_max_; }
  int dim() const { return K_max_ + 1; }
  int sample_count() const { return samples_; }
  double g_norm_limit() const { return g_norm_limit_; }
  // Homogeneity exponent mu = -1 - 2ir.
  cplx mu() const { return cplx(-1.0, -2.0 * r_); }

  int index_of(int k) const { return (k + K_max_) / 2; }
  int weight_of(int idx) const { return 2 * idx - K_max_; }
  // Index range of the interior block |k| <= K_max/2.
  int interior_begin() const { return index_of(-interior_K()); }
  int interior_dim() const { return interior_K() + 1; }
  int interior_K() const { return 2 * (K_max_ / 4); }

  PrincipalSeries with_K(int K_max) const;

  // Default truncation max(64, ceil(8/hbar)), rounded up to a multiple of 4.
  static int default_K_max(double hbar);
  // Smallest multiple of 4 (at least 64) whose interior block reaches the
  // K-types with |xi_3| <= xi3_extent, plus a margin of 8.
  static int covering_K_max(double hbar, double xi3_extent);

 private:
  double r_;
  int K_max_;
  int samples_;
  double g_norm_limit_;
};

struct OperatorMatrix {
  CMatrix entries;
  int K_max = 0;
  double hbar = 0.0;  // 0 when not an Op_hbar
  std::string provenance;
  // Largest column-sample energy fraction near the Nyquist band.
  double aliasing = 0.0;

  CMatrix interior() const;
  double hermiticity_defect() const;  // ||M - M*||_F / ||M||_F on interior
};

struct KTypeVector {
  CVector coeffs;
  int K_max = 0;

  static KTypeVector basis(int K_max, int k);
  double norm() const { return coeffs.norm(); }
  // Fraction of squared norm outside |k| <= K_max/2.
  double tail_fraction() const;
};

// Accumulates sum_j c_j pi(g_j) restricted to a range of columns. Rows cover
// |k| <= K_max. The half-circle sample count can exceed the one of the
// representation; this is how assembly avoids folding fast columns back.
class CircleAccumulator {
 public:
  CircleAccumulator(const PrincipalSeries& pi, int col_K, int half_samples = 0);

  void add(const GroupMatrix& g, cplx coef);
  // Adds the contributions of `count` nodes stored as (a,b,c,d) of g^{-1}.
  void add_batch(const double* ginv, const cplx* coef, int count);
  void merge(const CircleAccumulator& other);

  int half_samples() const { return Np_; }
  int columns() const { return cols_; }
  int col_K() const { return col_K_; }

  // Fourier analysis of the accumulated columns. Entries outside the column
  // range stay zero. Throws TruncationError if aliasing > alias_tol on a
  // column with |n| <= check_K (check_K < 0 disables the throw).
  OperatorMatrix finish(double alias_tol = 1e-8, int check_K = -1) const;
  // Rows |k| <= rows_K, columns |n| <= K_max.
  CMatrix finish_tall(int rows_K) const;

 private:
  CMatrix transform(int rows_K, double alias_tol, int check_K, double* worst) const;
  void accumulate_geometry(const double* ginv, const cplx* coef, int count);

  const PrincipalSeries pi_;
  int col_K_;
  int cols_;
  int Np_;
  std::vector<double> cos_t_, sin_t_;
  std::vector<double> acc_re_, acc_im_;
  std::vector<double> z_re_, z_im_, s_re_, s_im_;
};

// Smallest 2^a 3^b 5^c even integer >= n.
int fft_friendly(int n);
// Half-circle sample count that keeps columns |n| <= col_K free of folding
// when the Moebius map stretches arcs by at most `stretch`.
int circle_samples_for(const PrincipalSeries& pi, int col_K, double stretch, bool checked = false);
// Largest singular value squared of g.
double stretch_of(const GroupMatrix& g);
// Columns |n| <= K_max of pi(g) with rows |k| <= rows_K (rows_K may exceed K_max).
CMatrix pi_of_g_columns(const PrincipalSeries& pi, const GroupMatrix& g, int rows_K);

// Matrix of pi(g). Throws DomainError if ||g|| exceeds the configured limit,
// TruncationError on sampling aliasing in the interior columns.
OperatorMatrix pi_of_g(const PrincipalSeries& pi, const GroupMatrix& g);

// d pi(x), closed form (tridiagonal in the K-type basis).
OperatorMatrix algebra_action(const PrincipalSeries& pi, const AlgebraVector& x);
// d pi(x) by symmetric differencing of pi(exp(t x)) with one Richardson step.
OperatorMatrix algebra_action_numeric(const PrincipalSeries& pi, const AlgebraVector& x,
                                      double t = 1e-3);

// Delta = 1 - sum_i d pi(X_i)^2 over the orthonormal basis X1, X2, X3.
// Computed with one extra K-type on each side, so it is exact for |k| <= K_max.
OperatorMatrix delta_matrix(const PrincipalSeries& pi);
// Diagonal value of Delta on e_k.
double delta_eigenvalue(double r, int k);
// Scalar by which X1^2 + X2^2 - X3^2 acts.
double casimir_value(double r);

// <Delta^s v, u> with Delta^s from the interior-block eigen-decomposition.
cplx sobolev_pairing(const PrincipalSeries& pi, const KTypeVector& v, const KTypeVector& u, int s);
double sobolev_norm(const PrincipalSeries& pi, const KTypeVector& v, int s);

// Largest singular value of the interior block.
double interior_opnorm(const CMatrix& m, const PrincipalSeries& pi);
double opnorm(const CMatrix& m);

}  // namespace orbitlab
