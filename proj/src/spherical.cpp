#include "fraclab/spherical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCircleNodes = 256;
constexpr int kAzimuth = 30;
constexpr int kContourNodes = 64;

using Legendre = boost::math::quadrature::gauss<double, 15>;

struct SphereNode {
  Point dir;
  double weight;
};

std::vector<SphereNode> sphere_rule(int n, double rotation) {
  std::vector<SphereNode> out;
  if (n == 1) {
    out.push_back({{1, 0, 0}, 1.0});
    out.push_back({{-1, 0, 0}, 1.0});
  } else if (n == 2) {
    for (int j = 0; j < kCircleNodes; ++j) {
      const double th = rotation + 2.0 * kPi * j / kCircleNodes;
      out.push_back({{std::cos(th), std::sin(th), 0}, 2.0 * kPi / kCircleNodes});
    }
  } else {
    // Boost stores the nonnegative half of the symmetric rule.
    std::vector<std::pair<double, double>> mu;
    const auto& a = Legendre::abscissa();
    const auto& w = Legendre::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      mu.emplace_back(a[i], w[i]);
      if (a[i] != 0.0) mu.emplace_back(-a[i], w[i]);
    }
    for (const auto& [c, wc] : mu) {
      const double s = std::sqrt(1.0 - c * c);
      for (int j = 0; j < kAzimuth; ++j) {
        const double ph = rotation + 2.0 * kPi * j / kAzimuth;
        out.push_back({{s * std::cos(ph), s * std::sin(ph), c}, wc * 2.0 * kPi / kAzimuth});
      }
    }
  }
  return out;
}

double sphere_measure(int n) { return n == 1 ? 2.0 : (n == 2 ? 2.0 * kPi : 4.0 * kPi); }

cplx mean_with_rule(const GriddingEvaluator& ev, const std::vector<SphereNode>& rule, const Point& x, double t) {
  const GridSpec& g = ev.grid();
  for (int d = 0; d < g.dim; ++d)
    if (std::abs(x[d]) + t > g.half_width * (1.0 + 1e-12))
      throw TruncationError("sphere of radius " + std::to_string(t) + " leaves the box");
  cplx s = 0.0;
  for (const auto& node : rule) {
    Point p{};
    for (int d = 0; d < g.dim; ++d) p[d] = x[d] - t * node.dir[d];
    s += node.weight * ev(p);
  }
  return s;
}

// Bound C' exp(-rho' t^gamma) for t^{n-1} |S| C exp(-rho (t - |x|)^gamma).
DecayCertificate transfer_decay(const DecayCertificate& c, int n, double xn) {
  if (c.numerically_zero_tail) return c;
  DecayCertificate out;
  out.gamma = c.gamma;
  out.rho = 0.5 * c.rho;
  double worst = 0.0;
  for (double t = 0.0; t < 200.0; t += 0.01) {
    const double r = std::max(t - xn, 0.0);
    const double lg = (n - 1) * std::log(std::max(t, 1e-300)) + std::log(sphere_measure(n) * c.C) -
                      c.rho * std::pow(r, c.gamma) + out.rho * std::pow(t, c.gamma);
    worst = std::max(worst, n == 1 || t > 0 ? lg : -INFINITY);
  }
  out.C = std::exp(worst);
  return out;
}

}  // namespace

cplx spherical_mean(const GriddingEvaluator& ev, const Point& x, double t, double rotation) {
  if (t < 0.0) throw DomainError("sphere radius must be nonnegative");
  return mean_with_rule(ev, sphere_rule(ev.grid().dim, rotation), x, t);
}

cplx spherical_mean(const Field& v, const Point& x, double t) { return spherical_mean(GriddingEvaluator(v), x, t); }

double RadialProfile::extent() const { return std::max(std::abs(t0), std::abs(t_end())); }

double RadialProfile::max_abs() const {
  double m = 0.0;
  for (const auto& v : h) m = std::max(m, std::abs(v));
  return m;
}

double RadialProfile::l1_norm() const {
  if (h.empty()) return 0.0;
  double s = 0.0;
  for (const auto& v : h) s += std::abs(v);
  s -= 0.5 * (std::abs(h.front()) + std::abs(h.back()));
  return s * dt;
}

RadialProfile RadialProfile::from_samples(double t0, double dt, std::vector<cplx> h,
                                          std::optional<DecayCertificate> decay) {
  if (!(dt > 0.0)) throw DomainError("profile step must be positive");
  RadialProfile p;
  p.t0 = t0;
  p.dt = dt;
  p.h = std::move(h);
  p.decay = decay;
  return p;
}

RadialProfile build_profile(const Field& v, const Point& x, const RegionSpec& region) {
  const GridSpec& g = v.grid();
  const int n = g.dim;
  if (!region.in_omega(x, n)) throw PreconditionError("profile centre is not in omega");
  double xm = 0.0;
  for (int d = 0; d < n; ++d) xm = std::max(xm, std::abs(x[d]));
  RadialProfile p;
  p.center = x;
  p.dim = n;
  p.dt = 0.5 * g.spacing();
  p.kappa = region.kappa;
  if (v.decay()) p.decay = transfer_decay(*v.decay(), n, norm(x, n));
  const int count = static_cast<int>(std::floor((g.half_width - xm) / p.dt + 1e-9)) + 1;
  GriddingEvaluator ev(v);
  const auto rule = sphere_rule(n, 0.0);
  p.h.resize(count);
  for (int j = 0; j < count; ++j) {
    const double t = p.t(j);
    p.h[j] = std::pow(t, n - 1) * mean_with_rule(ev, rule, x, t);
  }
  const double scale = p.max_abs();
  for (int j = 0; j < count && p.t(j) < region.kappa; ++j)
    if (std::abs(p.h[j]) >= 1e-12 * scale && scale > 0.0) {
      std::ostringstream os;
      os << "profile nonzero inside the kappa margin: |h(" << p.t(j) << ")| = " << std::abs(p.h[j]);
      throw MarginError(os.str());
    }
  return p;
}

double admissible_strip(const RadialProfile& f) {
  if (!f.decay) throw PreconditionError("Fourier-Laplace transform needs a decay bound for f");
  const double T = std::max(f.extent(), f.dt);
  const double overflow = 700.0 / T;
  if (f.decay->numerically_zero_tail) return overflow;
  const double s = (f.decay->rho * std::pow(T, f.decay->gamma) - 30.0) / T;
  return std::max(0.0, std::min(s, overflow));
}

std::vector<FLValue> fourier_laplace(const RadialProfile& f, const std::vector<cplx>& z) {
  const double strip = admissible_strip(f);
  const double T = std::max(f.extent(), f.dt);
  std::vector<FLValue> out;
  out.reserve(z.size());
  for (const cplx& zz : z) {
    if (std::abs(zz.imag()) > strip) {
      std::ostringstream os;
      os << "|Im z| = " << std::abs(zz.imag()) << " outside the admissible strip |Im z| <= " << strip;
      throw DomainError(os.str());
    }
    cplx s = 0.0;
    for (std::size_t j = 0; j < f.h.size(); ++j) {
      const double w = (j == 0 || j + 1 == f.h.size()) ? 0.5 : 1.0;
      s += w * f.h[j] * std::exp(cplx(0.0, -f.t(j)) * zz);
    }
    FLValue r;
    r.value = s * f.dt;
    if (!f.decay->numerically_zero_tail)
      r.tail_bound = f.decay->C * T * std::exp(-(f.decay->rho * std::pow(T, f.decay->gamma) - T * std::abs(zz.imag())));
    out.push_back(r);
  }
  return out;
}

namespace {

// mu_k = int f t^k dt from the k-th Taylor coefficient of F_f at 0, using a
// circle of radius R / T in z; R = k keeps the rounding error near
// sqrt(2 pi k) eps relative to ||f||_1.
cplx moment_from_transform(const RadialProfile& f, int k) {
  const double T = std::max(f.extent(), f.dt);
  const double R = std::min(std::max(1.0, static_cast<double>(k)), 0.9 * admissible_strip(f) * T);
  std::vector<cplx> zs(kContourNodes);
  for (int j = 0; j < kContourNodes; ++j) zs[j] = std::polar(R / T, 2.0 * kPi * (j + 0.5) / kContourNodes);
  auto vals = fourier_laplace(f, zs);
  cplx a = 0.0;
  for (int j = 0; j < kContourNodes; ++j) a += vals[j].value * std::pow(zs[j] * T, -k);
  a /= static_cast<double>(kContourNodes);
  // F_f(z) = sum_k (-i)^k mu_k z^k / k!
  return a * std::pow(T, k) * std::tgamma(k + 1.0) * std::pow(cplx(0.0, 1.0), k);
}

cplx direct_moment(const RadialProfile& f, int k) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < f.h.size(); ++j) {
    const double w = (j == 0 || j + 1 == f.h.size()) ? 0.5 : 1.0;
    s += w * f.h[j] * std::pow(f.t(j), k);
  }
  return s * f.dt;
}

}  // namespace

std::vector<EvenMomentRow> even_derivative_residuals(const RadialProfile& f, int M_max) {
  if (M_max < 0 || M_max > 8) throw DomainError("M_max must be in 0..8");
  const double T = std::max(f.extent(), f.dt);
  const double l1 = f.l1_norm();
  std::vector<EvenMomentRow> rows;
  for (int m = 0; m <= M_max; ++m) {
    EvenMomentRow r;
    r.m = m;
    r.direct = direct_moment(f, 2 * m);
    r.from_transform = moment_from_transform(f, 2 * m);
    r.normalized = l1 == 0.0 ? 0.0 : std::abs(r.direct) / (std::pow(T, 2 * m) * l1);
    rows.push_back(r);
  }
  return rows;
}

VanishingCertificate certify_vanishing(const RadialProfile& f, const std::vector<RadialProfile>& basis, int M_max) {
  if (basis.empty()) throw PreconditionError("empty basis");
  if (M_max < 0 || M_max > 8) throw DomainError("M_max must be in 0..8");
  const std::size_t S = f.h.size();
  const int K = static_cast<int>(basis.size());
  for (const auto& b : basis)
    if (b.h.size() != S || b.t0 != f.t0 || b.dt != f.dt) throw PreconditionError("basis lives on another t-grid");
  const double T = std::max(f.extent(), f.dt);

  VanishingCertificate c;
  // Membership: least-squares fit of f onto the basis samples.
  Eigen::MatrixXcd Phi(S, K);
  Eigen::VectorXcd fv(S);
  for (std::size_t j = 0; j < S; ++j) {
    fv(j) = f.h[j];
    for (int i = 0; i < K; ++i) Phi(j, i) = basis[i].h[j];
  }
  Eigen::VectorXcd coef = Phi.colPivHouseholderQr().solve(fv);
  const double fmax = fv.cwiseAbs().maxCoeff();
  c.class_residual = fmax == 0.0 ? 0.0 : (Phi * coef - fv).cwiseAbs().maxCoeff() / fmax;
  c.in_class = c.class_residual <= 1e-9;
  if (!c.in_class) throw PreconditionError("profile lies outside the certified finite-dimensional class");

  Eigen::MatrixXcd B(M_max + 1, K);
  double phi_l1 = 0.0;
  for (int i = 0; i < K; ++i) {
    phi_l1 = std::max(phi_l1, basis[i].l1_norm());
    for (int m = 0; m <= M_max; ++m) B(m, i) = direct_moment(basis[i], 2 * m) / std::pow(T, 2 * m);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
  c.sigma_min = svd.singularValues().minCoeff();
  if (K > M_max + 1 || c.sigma_min == 0.0) throw PreconditionError("basis moment matrix is rank deficient");

  double e2 = 0.0;
  for (int m = 0; m <= M_max; ++m) e2 += std::norm(moment_from_transform(f, 2 * m) / std::pow(T, 2 * m));
  c.moment_norm = std::sqrt(e2);
  c.l1_bound = std::sqrt(static_cast<double>(K)) * c.moment_norm / c.sigma_min * phi_l1;
  c.l1_actual = f.l1_norm();
  return c;
}

SupportVerdict support_decision(const Field& v, const RegionSpec& region, const std::vector<Point>& omega_samples,
                                double delta, double scale) {
  if (!v.decay()) throw PreconditionError("support decision needs a decay certificate");
  if (omega_samples.empty()) throw PreconditionError("no omega samples");
  const GridSpec& g = v.grid();
  const int n = g.dim;
  SupportVerdict out;
  out.tolerance = 1e3 * delta * scale;
  for (const auto& x : omega_samples)
    if (!region.in_omega(x, n)) throw PreconditionError("sample point is not in omega");
  if (v.max_abs() == 0.0) {
    out.zero = true;
    return out;
  }
  GriddingEvaluator ev(v);
  const auto rule = sphere_rule(n, 0.0);
  const double dt = 0.5 * g.spacing();
  for (const auto& x : omega_samples) {
    double xm = 0.0;
    for (int d = 0; d < n; ++d) xm = std::max(xm, std::abs(x[d]));
    const int count = static_cast<int>(std::floor((g.half_width - xm) / dt + 1e-9)) + 1;
    for (int j = 1; j < count; ++j) {
      const double t = j * dt;
      const cplx sm = mean_with_rule(ev, rule, x, t);
      ++out.samples;
      if (std::abs(sm) > out.max_abs) {
        out.max_abs = std::abs(sm);
        out.witness_x = x;
        out.witness_t = t;
        out.witness_value = sm;
      }
      if (out.max_abs > out.tolerance) return out;
    }
  }
  out.zero = true;
  return out;
}

}  // namespace fraclab
