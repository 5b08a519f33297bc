#include "orbitlab/repn_ps.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"

namespace orbitlab {

namespace {

// FFTW's planner is not thread safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

cplx ipow(cplx u, int n) {
  cplx result(1.0, 0.0);
  if (n < 0) {
    u = std::conj(u);
    n = -n;
  }
  while (n > 0) {
    if (n & 1) result *= u;
    u *= u;
    n >>= 1;
  }
  return result;
}

// Closed-form d pi on the basis elements, written into an extended index set.
CMatrix closed_form(const PrincipalSeries& pi, const AlgebraVector& x) {
  const int n = pi.dim();
  const cplx mu = pi.mu();
  const cplx I(0.0, 1.0);
  const double cH = x.coords()[0], cE = x.coords()[1], cF = x.coords()[2];
  CMatrix m = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int k = pi.weight_of(j);
    const cplx down = (mu + double(k)) / 2.0;  // coefficient scale toward e_{k-2}
    const cplx up = (mu - double(k)) / 2.0;    // toward e_{k+2}
    const cplx diag = (cE - cF) * (I / 2.0) * double(k);
    const cplx to_lo = -cH * down - (cE + cF) * (I / 2.0) * down;
    const cplx to_hi = -cH * up + (cE + cF) * (I / 2.0) * up;
    m(j, j) += diag;
    if (j > 0) m(j - 1, j) += to_lo;
    if (j + 1 < n) m(j + 1, j) += to_hi;
  }
  return m;
}

}  // namespace

double stretch_of(const GroupMatrix& g) {
  const double s = norms(g).frobenius;
  return 0.5 * (s * s + std::sqrt(std::max(0.0, s * s * s * s - 4.0)));
}

int fft_friendly(int n) {
  for (int m = std::max(n, 2);; ++m) {
    int k = m;
    for (int p : {2, 3, 5}) while (k % p == 0) k /= p;
    if (k == 1 && m % 2 == 0) return m;
  }
}

int circle_samples_for(const PrincipalSeries& pi, int col_K, double stretch, bool checked) {
  // A column e_n is spread over |k| <~ stretch*|n|; the spectrum is negligible
  // (1e-14 of the energy) past twice that.
  const double B = 2.0 * std::max(1.0, stretch) * (col_K + 12);
  const int K = pi.K_max();
  double need = 0.5 * (B + K);
  if (checked) need = std::max(need, 2.0 * B - K);
  return fft_friendly(std::max(pi.sample_count() / 2, static_cast<int>(std::ceil(need)) + 8));
}

CMatrix pi_of_g_columns(const PrincipalSeries& pi, const GroupMatrix& g, int rows_K) {
  if (g.matrix().norm() > pi.g_norm_limit())
    throw DomainError("group element norm exceeds the configured limit");
  const double st = stretch_of(g);
  const int Np = fft_friendly(std::max(circle_samples_for(pi, pi.K_max(), st, true), rows_K + 2));
  CircleAccumulator acc(pi, pi.K_max(), Np);
  acc.add(g, 1.0);
  return acc.finish_tall(rows_K);
}

PrincipalSeries::PrincipalSeries(double r, int K_max, int sample_count, double g_norm_limit)
    : r_(r), K_max_(K_max), samples_(sample_count), g_norm_limit_(g_norm_limit) {
  if (!(r > 0.0)) throw ParameterError("principal series needs r > 0");
  if (K_max < 2 || K_max % 2 != 0) throw ParameterError("K_max must be even and >= 2");
  if (samples_ == 0) samples_ = 4 * K_max;
  if (samples_ < 4 * K_max || samples_ % 2 != 0)
    throw ParameterError("sample_count must be even and >= 4 K_max");
}

PrincipalSeries PrincipalSeries::with_K(int K_max) const {
  return PrincipalSeries(r_, K_max, 4 * K_max, g_norm_limit_);
}

int PrincipalSeries::default_K_max(double hbar) {
  if (!(hbar > 0.0)) throw ParameterError("hbar must be positive");
  int k = std::max(64, static_cast<int>(std::ceil(8.0 / hbar - 1e-9)));
  return (k + 3) / 4 * 4;
}

int PrincipalSeries::covering_K_max(double hbar, double xi3_extent) {
  if (!(hbar > 0.0) || !(xi3_extent >= 0.0)) throw ParameterError("bad covering request");
  const double k_int = kSqrt2 * xi3_extent / hbar + 8.0;
  const int k = static_cast<int>(std::ceil(2.0 * k_int - 1e-9));
  return std::max(64, (k + 3) / 4 * 4);
}

CMatrix OperatorMatrix::interior() const {
  const int K = 2 * (K_max / 4);
  const int b = (K_max - K) / 2;
  return entries.block(b, b, K + 1, K + 1);
}

double OperatorMatrix::hermiticity_defect() const {
  const CMatrix m = interior();
  const double n = m.norm();
  if (n == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / n;
}

KTypeVector KTypeVector::basis(int K_max, int k) {
  KTypeVector v;
  v.K_max = K_max;
  v.coeffs = CVector::Zero(K_max + 1);
  v.coeffs[(k + K_max) / 2] = 1.0;
  return v;
}

double KTypeVector::tail_fraction() const {
  const double total = coeffs.squaredNorm();
  if (total == 0.0) return 0.0;
  double tail = 0.0;
  for (int i = 0; i < coeffs.size(); ++i) {
    const int k = 2 * i - K_max;
    if (std::abs(k) > K_max / 2) tail += std::norm(coeffs[i]);
  }
  return tail / total;
}

CircleAccumulator::CircleAccumulator(const PrincipalSeries& pi, int col_K, int half_samples)
    : pi_(pi), col_K_(col_K), cols_(col_K + 1), Np_(half_samples) {
  if (col_K < 0 || col_K > pi.K_max() || col_K % 2 != 0)
    throw ParameterError("column range must be even and within K_max");
  if (Np_ == 0) Np_ = pi.sample_count() / 2;
  if (Np_ <= pi.K_max()) throw ParameterError("too few circle samples for K_max");
  cos_t_.resize(Np_);
  sin_t_.resize(Np_);
  for (int m = 0; m < Np_; ++m) {
    const double t = M_PI * m / Np_;
    cos_t_[m] = std::cos(t);
    sin_t_[m] = std::sin(t);
  }
  acc_re_.assign(static_cast<size_t>(cols_) * Np_, 0.0);
  acc_im_.assign(static_cast<size_t>(cols_) * Np_, 0.0);
  z_re_.resize(Np_);
  z_im_.resize(Np_);
  s_re_.resize(Np_);
  s_im_.resize(Np_);
}

void CircleAccumulator::add(const GroupMatrix& g, cplx coef) {
  const GroupMatrix gi = g.inverse();
  const double ginv[4] = {gi(0, 0), gi(0, 1), gi(1, 0), gi(1, 1)};
  accumulate_geometry(ginv, &coef, 1);
}

void CircleAccumulator::add_batch(const double* ginv, const cplx* coef, int count) {
  accumulate_geometry(ginv, coef, count);
}

void CircleAccumulator::accumulate_geometry(const double* ginv, const cplx* coef, int count) {
  const auto kernel = kernels::accumulate_for(kernels::active_isa());
  const double two_r = 2.0 * pi_.r();
  for (int j = 0; j < count; ++j) {
    const double a = ginv[4 * j], b = ginv[4 * j + 1], c = ginv[4 * j + 2], d = ginv[4 * j + 3];
    const cplx cf = coef[j];
    if (cf == 0.0) continue;
    for (int m = 0; m < Np_; ++m) {
      const double wx = a * cos_t_[m] + b * sin_t_[m];
      const double wy = c * cos_t_[m] + d * sin_t_[m];
      const double rho2 = wx * wx + wy * wy;
      const double rho = std::sqrt(rho2);
      const cplx u(wx / rho, wy / rho);
      // |w|^{-1-2ir}
      const double ph = -two_r * 0.5 * std::log(rho2);
      const cplx J = cplx(std::cos(ph), std::sin(ph)) / rho;
      const cplx z = cf * J * ipow(u, -col_K_);
      const cplx s = u * u;
      z_re_[m] = z.real();
      z_im_[m] = z.imag();
      s_re_[m] = s.real();
      s_im_[m] = s.imag();
    }
    const kernels::GeometricBatch batch{z_re_.data(), z_im_.data(), s_re_.data(), s_im_.data(), Np_};
    kernel(batch, cols_, acc_re_.data(), acc_im_.data());
  }
}

void CircleAccumulator::merge(const CircleAccumulator& other) {
  if (other.Np_ != Np_ || other.cols_ != cols_ || other.pi_.K_max() != pi_.K_max())
    throw ParameterError("merging incompatible accumulators");
  for (size_t i = 0; i < acc_re_.size(); ++i) {
    acc_re_[i] += other.acc_re_[i];
    acc_im_[i] += other.acc_im_[i];
  }
}

CMatrix CircleAccumulator::transform(int rows_K, double alias_tol, int check_K, double* worst_out) const {
  if (rows_K >= Np_) throw ParameterError("requested rows exceed the circle sampling");
  const size_t total = static_cast<size_t>(cols_) * Np_;
  fftw_complex* buf = fftw_alloc_complex(total);
  for (size_t i = 0; i < total; ++i) {
    buf[i][0] = acc_re_[i];
    buf[i][1] = acc_im_[i];
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    int n[1] = {Np_};
    plan = fftw_plan_many_dft(1, n, cols_, buf, nullptr, 1, Np_, buf, nullptr, 1, Np_, FFTW_FORWARD,
                              FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }

  const int K = pi_.K_max();
  const int row_offset = (K - col_K_) / 2;
  CMatrix out = CMatrix::Zero(rows_K + 1, K + 1);
  const double scale = 1.0 / Np_;
  // Energy in the upper half of the unretained band. A column whose spectrum
  // has died out there has nothing left to fold back onto |k| <= K.
  const int band = (Np_ + K) / 2;
  double worst = 0.0;
  for (int c = 0; c < cols_; ++c) {
    const int n = 2 * c - col_K_;
    const fftw_complex* col = buf + static_cast<size_t>(c) * Np_;
    double energy = 0.0, high = 0.0;
    for (int q = 0; q < Np_; ++q) {
      const int qs = q < (Np_ + 1) / 2 ? q : q - Np_;
      const int k = 2 * qs;
      const double e = col[q][0] * col[q][0] + col[q][1] * col[q][1];
      energy += e;
      if (std::abs(k) >= band) high += e;
      if (std::abs(k) <= rows_K) out((k + rows_K) / 2, c + row_offset) = cplx(col[q][0], col[q][1]) * scale;
    }
    const double frac = energy > 0.0 ? high / energy : 0.0;
    worst = std::max(worst, frac);
    if (check_K >= 0 && std::abs(n) <= check_K && frac > alias_tol) {
      fftw_free(buf);
      throw TruncationError("circle sampling aliasing " + std::to_string(frac) + " in column k=" +
                            std::to_string(n));
    }
  }
  fftw_free(buf);
  if (worst_out) *worst_out = worst;
  return out;
}

OperatorMatrix CircleAccumulator::finish(double alias_tol, int check_K) const {
  OperatorMatrix out;
  out.K_max = pi_.K_max();
  out.entries = transform(pi_.K_max(), alias_tol, check_K, &out.aliasing);
  return out;
}

CMatrix CircleAccumulator::finish_tall(int rows_K) const { return transform(rows_K, 0.0, -1, nullptr); }

OperatorMatrix pi_of_g(const PrincipalSeries& pi, const GroupMatrix& g) {
  if (g.matrix().norm() > pi.g_norm_limit())
    throw DomainError("group element norm exceeds the configured limit");
  CircleAccumulator acc(pi, pi.K_max(), circle_samples_for(pi, pi.interior_K(), stretch_of(g), true));
  acc.add(g, 1.0);
  OperatorMatrix m = acc.finish(1e-8, pi.interior_K());
  m.provenance = "pi(g)";
  return m;
}

OperatorMatrix algebra_action(const PrincipalSeries& pi, const AlgebraVector& x) {
  OperatorMatrix m;
  m.K_max = pi.K_max();
  m.entries = closed_form(pi, x);
  m.provenance = "dpi closed form";
  return m;
}

OperatorMatrix algebra_action_numeric(const PrincipalSeries& pi, const AlgebraVector& x, double t) {
  auto central = [&](double h) {
    const CMatrix p = pi_of_g(pi, exp_map(x * h)).entries;
    const CMatrix q = pi_of_g(pi, exp_map(x * (-h))).entries;
    return CMatrix((p - q) / (2.0 * h));
  };
  const CMatrix d1 = central(t);
  const CMatrix d2 = central(t / 2);
  OperatorMatrix m;
  m.K_max = pi.K_max();
  m.entries = (4.0 * d2 - d1) / 3.0;
  if (!m.entries.allFinite()) throw NumericalError("differencing produced non-finite entries");
  m.provenance = "dpi differenced";
  return m;
}

OperatorMatrix delta_matrix(const PrincipalSeries& pi) {
  const PrincipalSeries ext(pi.r(), pi.K_max() + 2, 4 * (pi.K_max() + 2));
  CMatrix sum = CMatrix::Identity(ext.dim(), ext.dim());
  const Mat3& B = basis_to_ortho();
  const Mat3 Binv = B.inverse();
  for (int i = 0; i < 3; ++i) {
    const AlgebraVector Xi(Vec3(Binv.col(i)));
    const CMatrix d = closed_form(ext, Xi);
    sum -= d * d;
  }
  OperatorMatrix m;
  m.K_max = pi.K_max();
  m.entries = sum.block(1, 1, pi.dim(), pi.dim());
  m.provenance = "Delta";
  return m;
}

double casimir_value(double r) { return -(1.0 + 4.0 * r * r) / 2.0; }

double delta_eigenvalue(double r, int k) { return 1.0 - casimir_value(r) + double(k) * k; }

cplx sobolev_pairing(const PrincipalSeries& pi, const KTypeVector& v, const KTypeVector& u, int s) {
  if (std::abs(s) > 6) throw ParameterError("sobolev exponent must satisfy |s| <= 6");
  if (v.K_max != pi.K_max() || u.K_max != pi.K_max())
    throw ParameterError("vector truncation does not match the representation");
  const CMatrix D = delta_matrix(pi).entries;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(D);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw NumericalError("Delta is not positive");
  const double lmax = std::log(ev.maxCoeff()), lmin = std::log(ev.minCoeff());
  if (std::abs(s) * std::max(std::abs(lmax), std::abs(lmin)) > 600.0)
    throw NumericalError("Delta^s overflows double precision");
  Eigen::VectorXd p(ev.size());
  for (int i = 0; i < ev.size(); ++i) p[i] = std::pow(ev[i], s);
  const CVector Dv = es.eigenvectors() * (p.asDiagonal() * (es.eigenvectors().adjoint() * v.coeffs));
  // <w, u> is linear in w, antilinear in u.
  return u.coeffs.dot(Dv);
}

double sobolev_norm(const PrincipalSeries& pi, const KTypeVector& v, int s) {
  return std::sqrt(std::max(0.0, sobolev_pairing(pi, v, v, s).real()));
}

double opnorm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()[0];
}

double interior_opnorm(const CMatrix& m, const PrincipalSeries& pi) {
  return opnorm(m.block(pi.interior_begin(), pi.interior_begin(), pi.interior_dim(), pi.interior_dim()));
}

}  // namespace orbitlab
