#include "orbitlab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "orbitlab/error.hpp"

namespace orbitlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
const double kInf = std::numeric_limits<double>::infinity();

Mat3 ortho_adjoint(const GroupMatrix& g) { return basis_to_ortho() * adjoint(g) * basis_to_ortho().inverse(); }
Mat3 ortho_coadjoint(const GroupMatrix& g) { return dual_to_ortho() * coadjoint(g) * dual_to_ortho().inverse(); }

class ZeroFT : public InverseFT {
 public:
  bool k_invariant() const override { return true; }
  cplx value(const Vec3&) const override { return 0.0; }
  double decay_radius(double) const override { return 0.0; }
  std::string kind() const override { return "zero"; }
};

class GaussianFT : public InverseFT {
 public:
  bool k_invariant() const override { return c_.head<2>().norm() == 0.0; }
  GaussianFT(const Vec3& c, double sigma, cplx amp) : c_(c), sigma_(sigma), amp_(amp) {
    pref_ = amp * std::pow(sigma / std::sqrt(kTwoPi), 3);
  }
  cplx value(const Vec3& x) const override {
    const double ph = -x.dot(c_);
    return pref_ * std::exp(-0.5 * sigma_ * sigma_ * x.squaredNorm()) * cplx(std::cos(ph), std::sin(ph));
  }
  double decay_radius(double tol) const override { return std::sqrt(2.0 * std::log(1.0 / tol)) / sigma_; }
  std::string kind() const override { return "analytic"; }
  void on_grid(double h, int M, std::vector<cplx>& out) const override {
    const int L = 2 * M + 1;
    std::vector<cplx> f[3];
    for (int d = 0; d < 3; ++d) {
      f[d].resize(L);
      for (int i = 0; i < L; ++i) {
        const double x = h * (i - M);
        f[d][i] = std::exp(-0.5 * sigma_ * sigma_ * x * x) * std::polar(1.0, -x * c_[d]);
      }
    }
    out.resize(static_cast<size_t>(L) * L * L);
    size_t idx = 0;
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) {
        const cplx fij = pref_ * f[0][i] * f[1][j];
        for (int k = 0; k < L; ++k) out[idx++] = fij * f[2][k];
      }
  }
  const Vec3& center() const { return c_; }
  double sigma() const { return sigma_; }
  cplx amplitude() const { return amp_; }

 private:
  Vec3 c_;
  double sigma_;
  cplx amp_;
  cplx pref_;
};

class RadialFT : public InverseFT {
 public:
  bool k_invariant() const override { return c_.head<2>().norm() == 0.0; }
  RadialFT(const Vec3& c, std::function<double(double)> f, double support, double feature, double x_max)
      : c_(c), f_(std::move(f)), support_(support), feature_(feature), x_max_(x_max),
        table_(f_, support, feature, x_max) {}
  cplx value(const Vec3& x) const override {
    const double R = x.norm();
    if (R > table_.x_max()) return 0.0;  // beyond the tabulated range a^v is treated as negligible
    const double ph = -x.dot(c_);
    return table_(R) * cplx(std::cos(ph), std::sin(ph));
  }
  double decay_radius(double tol) const override { return table_.decay_radius(tol); }
  std::string kind() const override { return "radial"; }
  const Vec3& center() const { return c_; }
  const std::function<double(double)>& profile() const { return f_; }
  double support() const { return support_; }
  double feature() const { return feature_; }
  double x_max() const { return x_max_; }

 private:
  Vec3 c_;
  std::function<double(double)> f_;
  double support_, feature_, x_max_;
  RadialTransform table_;
};

class ScaledFT : public InverseFT {
 public:
  bool k_invariant() const override { return a_->k_invariant() && (!b_ || b_->k_invariant()); }
  ScaledFT(std::shared_ptr<const InverseFT> a, cplx ca, std::shared_ptr<const InverseFT> b, cplx cb)
      : a_(std::move(a)), b_(std::move(b)), ca_(ca), cb_(cb) {}
  cplx value(const Vec3& x) const override {
    cplx v = ca_ * a_->value(x);
    if (b_) v += cb_ * b_->value(x);
    return v;
  }
  double decay_radius(double tol) const override {
    return std::max(a_->decay_radius(tol), b_ ? b_->decay_radius(tol) : 0.0);
  }
  std::string kind() const override { return b_ ? "sum" : "scaled"; }
  void on_grid(double h, int M, std::vector<cplx>& out) const override {
    a_->on_grid(h, M, out);
    for (auto& v : out) v *= ca_;
    if (b_) {
      std::vector<cplx> tmp;
      b_->on_grid(h, M, tmp);
      for (size_t i = 0; i < out.size(); ++i) out[i] += cb_ * tmp[i];
    }
  }

 private:
  std::shared_ptr<const InverseFT> a_, b_;
  cplx ca_, cb_;
};

class ActedFT : public InverseFT {
 public:
  ActedFT(std::shared_ptr<const InverseFT> inner, const GroupMatrix& g)
      : inner_(std::move(inner)), ginv_(ortho_adjoint(g.inverse())), stretch_(norms(g).ad) {}
  cplx value(const Vec3& x) const override { return inner_->value(ginv_ * x); }
  double decay_radius(double tol) const override { return inner_->decay_radius(tol) * stretch_; }
  std::string kind() const override { return "acted(" + inner_->kind() + ")"; }

 private:
  std::shared_ptr<const InverseFT> inner_;
  Mat3 ginv_;
  double stretch_;
};

// Average over K: x = (x1, x2, x3) -> rotations of (x1, x2). Trapezoid in the
// angle, with enough points for the band limit `freq`.
cplx circle_average(const std::function<cplx(const Vec3&)>& f, const Vec3& x, double freq) {
  const double rho = x.head<2>().norm();
  if (rho == 0.0) return f(x);
  const int n = 2 * static_cast<int>(std::ceil(rho * freq)) + 16;
  cplx sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double ph = kTwoPi * j / n;
    sum += f(Vec3(rho * std::cos(ph), rho * std::sin(ph), x[2]));
  }
  return sum / double(n);
}

class KAveragedFT : public InverseFT {
 public:
  KAveragedFT(std::shared_ptr<const InverseFT> inner, double freq) : inner_(std::move(inner)), freq_(freq) {}
  bool k_invariant() const override { return true; }
  cplx value(const Vec3& x) const override {
    return circle_average([this](const Vec3& y) { return inner_->value(y); }, x, freq_);
  }
  double decay_radius(double tol) const override { return inner_->decay_radius(tol); }
  std::string kind() const override { return "kavg(" + inner_->kind() + ")"; }

 private:
  std::shared_ptr<const InverseFT> inner_;
  double freq_;
};

double sample_min_real(const Symbol& a, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0, 1);
  const auto& sp = a.meta().support;
  const double R = sp.kind == SupportDescriptor::Kind::Global ? 10.0 : sp.radius * 1.05;
  double mn = kInf;
  for (int i = 0; i < n; ++i) {
    Vec3 d(nd(rng), nd(rng), nd(rng));
    d *= R * std::cbrt(ud(rng)) / d.norm();
    mn = std::min(mn, a.at(sp.center + d).real());
  }
  return mn;
}

SupportDescriptor bounding(const SupportDescriptor& a, const SupportDescriptor& b) {
  using K = SupportDescriptor::Kind;
  if (a.kind == K::Global || b.kind == K::Global) return {};
  if (a.radius == 0.0) return b;
  if (b.radius == 0.0) return a;
  SupportDescriptor s;
  s.kind = (a.kind == K::Ball && b.kind == K::Ball) ? K::Ball : K::Effective;
  const double d = (a.center - b.center).norm();
  if (d + b.radius <= a.radius) return a;
  if (d + a.radius <= b.radius) return b;
  const double R = 0.5 * (d + a.radius + b.radius);
  s.radius = R;
  s.center = d > 0 ? Vec3(a.center + (R - a.radius) * (b.center - a.center) / d) : a.center;
  return s;
}

}  // namespace

void InverseFT::on_grid(double h, int M, std::vector<cplx>& out) const {
  const int L = 2 * M + 1;
  out.resize(static_cast<size_t>(L) * L * L);
  size_t idx = 0;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j)
      for (int k = -M; k <= M; ++k) out[idx++] = value(Vec3(h * i, h * j, h * k));
}

const InverseFT& Symbol::ift() const {
  if (!ift_) throw ParameterError("symbol '" + meta_.spec + "' has no inverse transform provider");
  return *ift_;
}

double Symbol::frequency_extent() const {
  const auto& s = meta_.support;
  if (s.kind == SupportDescriptor::Kind::Global) return kInf;
  return s.center.norm() + s.radius;
}

double standard_bump(double u) {
  const double u2 = u * u;
  if (u2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u2));
}

double BumpProfile::operator()(double u) const {
  if (kind == Kind::Plateau) {
    const double b = standard_bump(u);
    return b * b;
  }
  return std::exp(-0.5 * u * u / (sigma * sigma));
}

double BumpProfile::sqrt_value(double u) const {
  if (kind == Kind::Plateau) return standard_bump(u);
  return std::exp(-0.25 * u * u / (sigma * sigma));
}

double BumpProfile::effective_radius() const {
  if (kind == Kind::Plateau) return 1.0;
  return sigma * std::sqrt(2.0 * std::log(1e16));
}

double japanese_bracket(const Vec3& xi, double r) { return std::sqrt(r * r + xi.squaredNorm()); }

Symbol make_zero() {
  SymbolMeta m;
  m.order = -kInf;
  m.support.kind = SupportDescriptor::Kind::Ball;
  m.support.radius = 0.0;
  m.spec = "zero";
  m.nonnegative = true;
  return Symbol([](const Vec3&) { return cplx(0.0); }, std::make_shared<ZeroFT>(), m);
}

Symbol make_gaussian(const Vec3& center, double sigma, double amplitude) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian width must be positive");
  SymbolMeta m;
  m.order = -kInf;
  m.support.kind = SupportDescriptor::Kind::Effective;
  m.support.center = center;
  m.support.radius = sigma * std::sqrt(2.0 * std::log(1e16));
  m.spec = "gaussian(sigma=" + std::to_string(sigma) + ")";
  m.nonnegative = amplitude >= 0.0;
  const double s2 = sigma * sigma;
  return Symbol([=](const Vec3& xi) { return cplx(amplitude * std::exp(-0.5 * (xi - center).squaredNorm() / s2)); },
                std::make_shared<GaussianFT>(center, sigma, amplitude), m);
}

Symbol make_radial(const Vec3& center, std::function<double(double)> f, double support, double feature,
                   double x_max, SymbolMeta meta) {
  meta.support.center = center;
  if (meta.support.kind == SupportDescriptor::Kind::Global) meta.support.kind = SupportDescriptor::Kind::Ball;
  meta.support.radius = support;
  auto ft = std::make_shared<RadialFT>(center, f, support, feature, x_max);
  return Symbol(
      [center, f, support](const Vec3& xi) {
        const double rho = (xi - center).norm();
        return cplx(rho < support ? f(rho) : 0.0);
      },
      ft, std::move(meta));
}

Symbol make_small_ball(double hbar, const Covector& xi0, double delta, const BumpProfile& alpha,
                       SmallBallCentering centering, double x_max) {
  if (!(delta > 0.0 && delta < 0.5)) throw ParameterError("small-ball roughness must lie in (0, 1/2)");
  if (!(hbar > 0.0 && hbar <= 1.0)) throw ParameterError("hbar must lie in (0, 1]");
  const double w = std::pow(hbar, delta);
  const Vec3 c = centering == SmallBallCentering::Centered ? xi0.ortho() : Vec3(w * xi0.ortho());
  if (x_max <= 0.0) x_max = 2.0 / hbar;
  Symbol s;
  if (alpha.kind == BumpProfile::Kind::Gauss) {
    s = make_gaussian(c, alpha.sigma * w, 1.0);
  } else {
    SymbolMeta m;
    m.support.kind = SupportDescriptor::Kind::Ball;
    m.nonnegative = true;
    s = make_radial(c, [alpha, w](double rho) { return alpha(rho / w); }, w, 0.1 * w, x_max, m);
  }
  auto& m = s.meta();
  m.order = -kInf;
  m.delta = delta;
  m.hbar = hbar;
  m.nonnegative = true;
  m.spec = "smallball(h=" + std::to_string(hbar) + ",delta=" + std::to_string(delta) +
           ",profile=" + alpha.name() + (centering == SmallBallCentering::Literal ? ",literal" : "") + ")";
  return s;
}

double Taper::operator()(double rho) const {
  if (!active()) return 1.0;
  return plateau_value(rho);
}

double Taper::plateau_value(double rho) const {
  if (rho <= inner) return 1.0;
  if (rho >= outer) return 0.0;
  const double t = (rho - inner) / (outer - inner);
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

Taper Taper::for_block(double xi_block, double ratio) {
  if (!(ratio > 1.0)) throw ParameterError("taper ratio must exceed 1");
  Taper t;
  t.inner = 1.25 * xi_block + 0.5;
  t.outer = ratio * t.inner;
  return t;
}

double sobolev_b(double hbar, double s, double kappa, double rho) {
  return std::pow(hbar, -s) * std::pow(std::pow(hbar, 2.0 * (1.0 - kappa)) + rho * rho, 0.5 * s);
}

double sobolev_b_r(double hbar, double s, double r, double rho) {
  return std::pow(r * r + rho * rho / (hbar * hbar), 0.5 * s);
}

SobolevPair make_sobolev(double hbar, double s, double kappa, const Taper& taper, double x_max) {
  if (!(hbar > 0.0 && hbar <= 1.0)) throw ParameterError("hbar must lie in (0, 1]");
  if (!(s >= 0.0)) throw ParameterError("sobolev order must be >= 0");
  if (!(kappa > 0.5 && kappa < 1.0)) throw ParameterError("kappa must lie in (1/2, 1)");
  if (x_max <= 0.0) x_max = 2.0 / hbar;
  SymbolMeta mb, ma;
  mb.order = s;
  ma.order = -s;
  mb.delta = ma.delta = 1.0 - kappa;
  mb.hbar = ma.hbar = hbar;
  mb.nonnegative = ma.nonnegative = true;
  const std::string tag = "(h=" + std::to_string(hbar) + ",s=" + std::to_string(s) + ",kappa=" + std::to_string(kappa) + ")";
  mb.spec = "sobolev_b" + tag;
  ma.spec = "sobolev_inv" + tag;
  auto fb = [=](double rho) { return sobolev_b(hbar, s, kappa, rho) * taper(rho); };
  auto fa = [=](double rho) { return taper(rho) / sobolev_b(hbar, s, kappa, rho); };
  SobolevPair p;
  if (taper.active()) {
    mb.support.kind = ma.support.kind = SupportDescriptor::Kind::Ball;
    const double feature = std::min(std::pow(hbar, 1.0 - kappa), 0.25 * (taper.outer - taper.inner));
    p.b = make_radial(Vec3::Zero(), fb, taper.outer, feature, x_max, mb);
    p.a_inv = make_radial(Vec3::Zero(), fa, taper.outer, feature, x_max, ma);
  } else {
    // growing / slowly decaying: no inverse transform
    p.b = Symbol([=](const Vec3& xi) { return cplx(fb(xi.norm())); }, nullptr, mb);
    p.a_inv = Symbol([=](const Vec3& xi) { return cplx(fa(xi.norm())); }, nullptr, ma);
  }
  return p;
}

Symbol make_laplace_symbol(const Taper& taper, double x_max) {
  if (!taper.active()) throw ParameterError("1 + |xi|^2 needs an active taper");
  SymbolMeta m;
  m.order = 2;
  m.nonnegative = true;
  m.spec = "laplace(taper=" + std::to_string(taper.inner) + ")";
  m.support.kind = SupportDescriptor::Kind::Ball;
  return make_radial(Vec3::Zero(), [taper](double rho) { return (1.0 + rho * rho) * taper(rho); }, taper.outer,
                     std::min(0.5, 0.25 * (taper.outer - taper.inner)), x_max, m);
}

Symbol make_unit_symbol(const Taper& taper, double x_max) {
  if (!taper.active()) throw ParameterError("the unit symbol needs an active taper");
  SymbolMeta m;
  m.order = 0;
  m.nonnegative = true;
  m.spec = "unit(taper=" + std::to_string(taper.inner) + ")";
  m.support.kind = SupportDescriptor::Kind::Ball;
  return make_radial(Vec3::Zero(), [taper](double rho) { return taper(rho); }, taper.outer,
                     std::min(0.5, 0.25 * (taper.outer - taper.inner)), x_max, m);
}

Symbol sqrt_symbol(const Symbol& a) {
  if (!a.meta().real) throw DomainError("square root of a complex symbol");
  if (sample_min_real(a, 1000, 99) < -1e-12) throw DomainError("square root of a symbol with negative values");
  SymbolMeta m = a.meta();
  m.spec = "sqrt(" + a.meta().spec + ")";
  m.order = a.meta().order / 2;
  m.nonnegative = true;
  if (auto g = std::dynamic_pointer_cast<const GaussianFT>(a.ift_ptr())) {
    Symbol s = make_gaussian(g->center(), g->sigma() * kSqrt2, std::sqrt(g->amplitude().real()));
    SymbolMeta keep = m;
    keep.support = s.meta().support;
    s.meta() = keep;
    return s;
  }
  if (auto r = std::dynamic_pointer_cast<const RadialFT>(a.ift_ptr())) {
    auto f = r->profile();
    // the square root of a squared bump keeps the same feature scale
    return make_radial(r->center(), [f](double rho) { return std::sqrt(std::max(0.0, f(rho))); }, r->support(),
                       r->feature(), r->x_max(), m);
  }
  const Symbol::Eval ev = [a](const Vec3& xi) { return cplx(std::sqrt(std::max(0.0, a.at(xi).real()))); };
  Symbol tmp(ev, nullptr, m);
  if (a.has_ift() && m.support.kind != SupportDescriptor::Kind::Global)
    return Symbol(ev, std::make_shared<GridInverseFT>(tmp), m);
  return tmp;
}

Symbol act(const GroupMatrix& g, const Symbol& a) {
  const Mat3 back = ortho_coadjoint(g.inverse());
  SymbolMeta m = a.meta();
  m.spec = "act(" + a.meta().spec + ")";
  m.support.center = ortho_coadjoint(g) * a.meta().support.center;
  m.support.radius = a.meta().support.radius * norms(g).coad;
  std::shared_ptr<const InverseFT> ft;
  if (a.has_ift()) ft = std::make_shared<ActedFT>(a.ift_ptr(), g);
  return Symbol([a, back](const Vec3& xi) { return a.at(back * xi); }, ft, m);
}

Symbol k_average(const Symbol& a) {
  SymbolMeta m = a.meta();
  m.spec = "kavg(" + a.meta().spec + ")";
  const Vec3 c = a.meta().support.center;
  m.support.center = Vec3(0.0, 0.0, c[2]);
  m.support.radius = a.meta().support.radius + c.head<2>().norm();
  std::shared_ptr<const InverseFT> ft;
  double xfreq = 40.0;
  if (a.has_ift()) {
    const double xa = a.frequency_extent();
    if (!std::isfinite(xa)) throw ParameterError("K-average needs a bounded frequency support");
    ft = std::make_shared<KAveragedFT>(a.ift_ptr(), xa);
    xfreq = a.ift().decay_radius(1e-14);
  }
  return Symbol([a, xfreq](const Vec3& xi) { return circle_average([&a](const Vec3& y) { return a.at(y); }, xi, xfreq); },
                ft, m);
}

Symbol add(const Symbol& a, const Symbol& b) {
  SymbolMeta m;
  m.order = std::max(a.meta().order, b.meta().order);
  m.delta = std::max(a.meta().delta, b.meta().delta);
  m.support = bounding(a.meta().support, b.meta().support);
  m.real = a.meta().real && b.meta().real;
  m.nonnegative = a.meta().nonnegative && b.meta().nonnegative;
  m.hbar = a.meta().hbar;
  m.spec = "(" + a.meta().spec + "+" + b.meta().spec + ")";
  std::shared_ptr<const InverseFT> ft;
  if (a.has_ift() && b.has_ift()) ft = std::make_shared<ScaledFT>(a.ift_ptr(), 1.0, b.ift_ptr(), 1.0);
  return Symbol([a, b](const Vec3& xi) { return a.at(xi) + b.at(xi); }, ft, m);
}

Symbol scale(const Symbol& a, cplx c) {
  SymbolMeta m = a.meta();
  m.spec = "scale(" + a.meta().spec + ")";
  m.real = a.meta().real && c.imag() == 0.0;
  m.nonnegative = a.meta().nonnegative && c.imag() == 0.0 && c.real() >= 0.0;
  std::shared_ptr<const InverseFT> ft;
  if (a.has_ift()) ft = std::make_shared<ScaledFT>(a.ift_ptr(), c, nullptr, 0.0);
  return Symbol([a, c](const Vec3& xi) { return c * a.at(xi); }, ft, m);
}

Symbol multiply(const Symbol& a, const Symbol& b) {
  if (a.meta().support.kind != SupportDescriptor::Kind::Global && a.meta().support.radius == 0.0) return make_zero();
  if (b.meta().support.kind != SupportDescriptor::Kind::Global && b.meta().support.radius == 0.0) return make_zero();
  SymbolMeta m;
  m.order = a.meta().order + b.meta().order;
  m.delta = std::max(a.meta().delta, b.meta().delta);
  m.real = a.meta().real && b.meta().real;
  m.nonnegative = a.meta().nonnegative && b.meta().nonnegative;
  m.hbar = a.meta().hbar;
  m.spec = "(" + a.meta().spec + "*" + b.meta().spec + ")";
  auto ga = std::dynamic_pointer_cast<const GaussianFT>(a.ift_ptr());
  auto gb = std::dynamic_pointer_cast<const GaussianFT>(b.ift_ptr());
  if (ga && gb) {
    const double s1 = ga->sigma() * ga->sigma(), s2 = gb->sigma() * gb->sigma();
    const double s = std::sqrt(s1 * s2 / (s1 + s2));
    const Vec3 c = (ga->center() * s2 + gb->center() * s1) / (s1 + s2);
    const double k = std::exp(-0.5 * (ga->center() - gb->center()).squaredNorm() / (s1 + s2));
    Symbol out = make_gaussian(c, s, (ga->amplitude() * gb->amplitude()).real() * k);
    m.support = out.meta().support;
    out.meta() = m;
    return out;
  }
  auto ra = std::dynamic_pointer_cast<const RadialFT>(a.ift_ptr());
  auto rb = std::dynamic_pointer_cast<const RadialFT>(b.ift_ptr());
  if (ra && rb && (ra->center() - rb->center()).norm() == 0.0) {
    auto fa = ra->profile();
    auto fb = rb->profile();
    m.support.kind = SupportDescriptor::Kind::Ball;
    return make_radial(ra->center(), [fa, fb](double rho) { return fa(rho) * fb(rho); },
                       std::min(ra->support(), rb->support()), std::min(ra->feature(), rb->feature()),
                       std::max(ra->x_max(), rb->x_max()), m);
  }
  // the smaller of the two supports contains the product's support
  const auto& sa = a.meta().support;
  const auto& sb = b.meta().support;
  using K = SupportDescriptor::Kind;
  if (sa.kind == K::Global) m.support = sb;
  else if (sb.kind == K::Global) m.support = sa;
  else {
    m.support = sa.radius <= sb.radius ? sa : sb;
    if ((sa.center - sb.center).norm() > sa.radius + sb.radius) return make_zero();
  }
  const Symbol::Eval ev = [a, b](const Vec3& xi) { return a.at(xi) * b.at(xi); };
  Symbol tmp(ev, nullptr, m);
  if (a.has_ift() && b.has_ift() && m.support.kind != K::Global)
    return Symbol(ev, std::make_shared<GridInverseFT>(tmp), m);
  return tmp;
}

std::function<cplx(const AlgebraVector&)> inverse_ft(const Symbol& a) {
  auto ft = a.ift_ptr();
  if (!ft) throw ParameterError("symbol '" + a.meta().spec + "' has no inverse transform provider");
  return [ft](const AlgebraVector& x) { return ft->value(x.ortho()); };
}

GridInverseFT::GridInverseFT(const Symbol& a, int n, double box_factor) : n_(n) {
  const auto& sp = a.meta().support;
  if (sp.kind == SupportDescriptor::Kind::Global) throw ParameterError("grid transform needs a bounded support");
  if (n < 8) throw ParameterError("grid transform needs n >= 8");
  center_ = sp.center;
  const double W = std::max(sp.radius, 1e-12) * 0.55 * box_factor;
  step_ = 2.0 * W / n;
  samples_.resize(static_cast<size_t>(n) * n * n);
  size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        samples_[idx++] = a.at(center_ + Vec3(-W + (i + 0.5) * step_, -W + (j + 0.5) * step_, -W + (k + 0.5) * step_));
  reliable_ = M_PI / step_;
  decay_hint_ = reliable_;
}

cplx GridInverseFT::value(const Vec3& x) const {
  if (x.norm() > reliable_) throw NumericalError("grid transform evaluated beyond its reliable range");
  const double W = 0.5 * n_ * step_;
  std::vector<cplx> e[3];
  for (int d = 0; d < 3; ++d) {
    e[d].resize(n_);
    for (int i = 0; i < n_; ++i) e[d][i] = std::polar(1.0, -x[d] * (-W + (i + 0.5) * step_));
  }
  cplx sum = 0.0;
  size_t idx = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      cplx row = 0.0;
      for (int k = 0; k < n_; ++k) row += samples_[idx++] * e[2][k];
      sum += row * e[0][i] * e[1][j];
    }
  const double ph = -x.dot(center_);
  return sum * std::pow(step_ / kTwoPi, 3) * cplx(std::cos(ph), std::sin(ph));
}

double GridInverseFT::decay_radius(double) const { return decay_hint_; }

void GridInverseFT::on_grid(double h, int M, std::vector<cplx>& out) const {
  if (h * M * std::sqrt(3.0) > reliable_ * 4)
    throw NumericalError("grid transform lattice exceeds its reliable range");
  const int L = 2 * M + 1;
  const double W = 0.5 * n_ * step_;
  using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
  Mat E(L, n_);
  for (int i = 0; i < L; ++i)
    for (int a = 0; a < n_; ++a) E(i, a) = std::polar(1.0, -h * (i - M) * (-W + (a + 0.5) * step_));
  // pass over the fastest index: S (n^2 x n) * E^T -> T1 (n^2 x L)
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(samples_.data(), n_ * n_, n_);
  const Mat T1 = S * E.transpose();  // rows (a,b), cols k
  // second index
  std::vector<Mat> T2(n_);
  for (int a = 0; a < n_; ++a) T2[a] = E * T1.block(a * n_, 0, n_, L);  // (j, k)
  out.assign(static_cast<size_t>(L) * L * L, 0.0);
  const double pref = std::pow(step_ / kTwoPi, 3);
  for (int i = 0; i < L; ++i) {
    const double xi = h * (i - M);
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k) {
        cplx s = 0.0;
        for (int a = 0; a < n_; ++a) s += E(i, a) * T2[a](j, k);
        const double ph = -(xi * center_[0] + h * (j - M) * center_[1] + h * (k - M) * center_[2]);
        out[(static_cast<size_t>(i) * L + j) * L + k] = pref * s * cplx(std::cos(ph), std::sin(ph));
      }
  }
}

cplx forward_ft(const InverseFT& ift, const Vec3& xi, double L, double h) {
  const int M = static_cast<int>(std::ceil(L / h));
  cplx sum = 0.0;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j)
      for (int k = -M; k <= M; ++k) {
        const Vec3 x(h * i, h * j, h * k);
        sum += ift.value(x) * std::polar(1.0, x.dot(xi));
      }
  return sum * h * h * h;
}

ClassReport estimate_class_membership(const std::function<Symbol(double)>& family, double m, double delta,
                                      const std::vector<double>& hbar_grid, int samples, unsigned seed) {
  if (hbar_grid.empty()) throw ParameterError("class estimation needs an hbar grid");
  ClassReport rep;
  rep.hbar_grid = hbar_grid;
  std::vector<Vec3> dirs = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 0).normalized(),
                            Vec3(1, 0, 1).normalized(), Vec3(0, 1, 1).normalized(), Vec3(1, 1, 1).normalized()};
  for (int order = 1; order <= 3; ++order)
    for (const auto& d : dirs) {
      rep.orders.push_back(order);
      rep.directions.push_back(d);
    }
  for (double h : hbar_grid) {
    const Symbol a = family(h);
    const auto& sp = a.meta().support;
    const bool global = sp.kind == SupportDescriptor::Kind::Global;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0, 1);
    std::vector<double> C(rep.orders.size(), 0.0);
    const double hd = std::pow(h, delta);
    for (int sidx = 0; sidx < samples; ++sidx) {
      Vec3 u(nd(rng), nd(rng), nd(rng));
      u.normalize();
      Vec3 xi;
      if (global) {
        // log-uniform radius covering both the h^delta scale and large |xi|
        xi = u * hd * std::pow(10.0, -1.0 + 4.0 * ud(rng));
      } else {
        xi = sp.center + u * sp.radius * 1.05 * std::cbrt(ud(rng));
      }
      const double jb = japanese_bracket(xi);
      const double step = 0.02 * hd * std::min(1.0, std::max(0.05, xi.norm() / hd + 0.05));
      for (size_t e = 0; e < rep.orders.size(); ++e) {
        const Vec3& d = rep.directions[e];
        auto f = [&](double t) { return a.at(xi + t * d).real(); };
        const double fm2 = f(-2 * step), fm1 = f(-step), f1 = f(step), f2 = f(2 * step);
        double der = 0.0;
        switch (rep.orders[e]) {
          case 1:
            der = (fm2 - 8 * fm1 + 8 * f1 - f2) / (12 * step);
            break;
          case 2:
            der = (-fm2 + 16 * fm1 - 30 * f(0.0) + 16 * f1 - f2) / (12 * step * step);
            break;
          default:
            der = (-fm2 + 2 * fm1 - 2 * f1 + f2) / (2 * step * step * step);
            break;
        }
        const int k = rep.orders[e];
        const double val = std::abs(der) * std::pow(hd, k) * std::pow(jb, k - m);
        if (!std::isfinite(val)) throw NumericalError("class estimation produced a non-finite derivative");
        C[e] = std::max(C[e], val);
      }
    }
    rep.constants.push_back(C);
  }
  // Membership is an upper bound, so only growth toward small h counts.
  rep.max_variation = 1.0;
  bool finite = true;
  for (size_t e = 0; e < rep.orders.size(); ++e) {
    for (size_t i = 0; i < rep.constants.size(); ++i) {
      finite = finite && std::isfinite(rep.constants[i][e]);
      for (size_t j = 0; j < rep.constants.size(); ++j) {
        if (rep.hbar_grid[i] >= rep.hbar_grid[j]) continue;
        const double big = rep.constants[i][e], ref = rep.constants[j][e];
        if (big < 1e-6) continue;  // identically negligible entries
        rep.max_variation = std::max(rep.max_variation, big / std::max(ref, 1e-300));
      }
    }
  }
  rep.pass = finite && rep.max_variation < 2.0;
  return rep;
}

}  // namespace orbitlab
