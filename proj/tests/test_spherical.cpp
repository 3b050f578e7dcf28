#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/ffunction.hpp"
#include "fraclab/spherical.hpp"

using namespace fraclab;
using fixtures::rel;

namespace {
const double kPi = std::numbers::pi;

GridSpec grid2() { return GridSpec::make(2, 12.0, 256); }

RegionSpec centred_region(int n = 2) {
  RegionSpec r;
  r.O = {Shape::ball({0, 0, 0}, 1.5)};
  r.omega = {Shape::ball({0, 0, 0}, 0.3)};
  r.kappa = 0.25;
  (void)n;
  return r;
}

DecayCertificate zero_tail() {
  DecayCertificate c;
  c.numerically_zero_tail = true;
  c.C = 1.0;
  return c;
}

// Smooth compact bumps on [0, 10] used as a finite certified class.
std::vector<RadialProfile> bump_basis(double dt, int K) {
  std::vector<RadialProfile> out;
  const int S = static_cast<int>(std::round(10.0 / dt)) + 1;
  for (int i = 0; i < K; ++i) {
    const double c = 2.0 + 2.0 * i, R = 1.5;
    std::vector<cplx> h(S);
    for (int j = 0; j < S; ++j) {
      const double s = (j * dt - c) / R;
      h[j] = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    }
    out.push_back(RadialProfile::from_samples(0.0, dt, h, zero_tail()));
  }
  return out;
}
}  // namespace

TEST(SphericalMean, RadialFieldAtOrigin) {
  auto spec = AnalyticSpec::shell({0, 0}, 3.5, 0.4);
  Field v = sample_analytic(grid2(), spec);
  GriddingEvaluator ev(v);
  for (double t : {0.5, 2.0, 3.3, 3.5, 4.1}) {
    const double want = 2 * kPi * spec.eval({t, 0, 0}, 2);
    EXPECT_NEAR(std::abs(spherical_mean(ev, {0, 0, 0}, t) - want), 0.0, 1e-9) << t;
  }
}

TEST(SphericalMean, ConstantGivesSurfaceMeasure) {
  const double want[] = {2.0, 2 * kPi, 4 * kPi};
  for (int n = 1; n <= 3; ++n) {
    auto g = GridSpec::make(n, 4.0, n == 3 ? 16 : 32);
    Field one = sample_analytic(g, AnalyticSpec::parse("const(1)"));
    EXPECT_NEAR(spherical_mean(one, {0.3, -0.2, 0.1}, 1.7).real(), want[n - 1], 1e-11) << n;
  }
}

TEST(SphericalMean, SphereMissingSupportGivesZero) {
  // Supported in 2 <= |y| <= 3, resolved by the finer grid.
  Field v = sample_analytic(GridSpec::make(2, 4.0, 512), AnalyticSpec::shell({0, 0}, 2.5, 0.5 / 6.1));
  EXPECT_LT(std::abs(spherical_mean(v, {0, 0, 0}, 1.0)), 1e-9 * v.max_abs());
}

TEST(SphericalMean, LeavingTheBoxThrows) {
  Field v = sample_analytic(grid2(), AnalyticSpec::shell({0, 0}, 3.5, 0.4));
  EXPECT_THROW(spherical_mean(v, {0.5, 0, 0}, 11.8), TruncationError);
}

TEST(SphericalMean, RotationInvariantForRadialField) {
  Field v2 = sample_analytic(grid2(), AnalyticSpec::shell({0, 0}, 3.5, 0.4));
  Field v3 = sample_analytic(GridSpec::make(3, 8.0, 64), AnalyticSpec::shell({0, 0, 0}, 3.0, 0.6));
  for (const Field* v : {&v2, &v3}) {
    GriddingEvaluator ev(*v);
    for (double t : {2.9, 3.7, 4.4}) {
      cplx a = spherical_mean(ev, {0, 0, 0}, t, 0.0), b = spherical_mean(ev, {0, 0, 0}, t, 0.123);
      EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a))) << t;
    }
  }
}

TEST(SphericalMean, Linear) {
  auto g = grid2();
  Field a = sample_analytic(g, AnalyticSpec::shell({0, 0}, 3.5, 0.4));
  Field b = sample_analytic(g, AnalyticSpec::bump({4, 1}, 1.5));
  const Point x{0.1, 0.2, 0};
  cplx lhs = spherical_mean(a * 2.0 + b * cplx(0, 3), x, 3.9);
  cplx rhs = 2.0 * spherical_mean(a, x, 3.9) + cplx(0, 3) * spherical_mean(b, x, 3.9);
  EXPECT_LT(std::abs(lhs - rhs), 1e-12);
}

TEST(Profile, ZeroFieldGivesZeroProfile) {
  auto p = build_profile(Field::zeros(grid2()), {0, 0, 0}, centred_region());
  EXPECT_EQ(p.max_abs(), 0.0);
  EXPECT_NEAR(p.dt, 0.5 * grid2().spacing(), 1e-15);
  EXPECT_NEAR(p.t_end(), 12.0, 1e-9);
}

TEST(Profile, AnnulusSupportAndMargin) {
  const double r0 = 3.5, w = 0.4;
  Field v = sample_analytic(grid2(), AnalyticSpec::shell({0, 0}, r0, w));
  auto p = build_profile(v, {0, 0, 0}, centred_region());
  const double scale = p.max_abs();
  for (std::size_t j = 0; j < p.h.size(); ++j) {
    const double t = p.t(j);
    if (std::abs(t - r0) > 6.1 * w + 0.1) EXPECT_LT(std::abs(p.h[j]), 1e-9 * scale) << t;
    if (t < p.kappa) EXPECT_LT(std::abs(p.h[j]), 1e-12 * scale) << t;
  }
  // Radial field: h(t) = 2 pi t v(t).
  for (std::size_t j = 0; j < p.h.size(); j += 7) {
    const double t = p.t(j), d = (t - r0) / w;
    const double want = std::abs(d) < 6.1 ? 2 * kPi * t * std::exp(-d * d) : 0.0;
    EXPECT_NEAR(std::abs(p.h[j]), want, 1e-8) << t;
  }
}

TEST(Profile, MarginViolationDetected) {
  Field v = sample_analytic(grid2(), AnalyticSpec::gaussian({0, 0}, 0.5));
  EXPECT_THROW(build_profile(v, {0, 0, 0}, centred_region()), MarginError);
  EXPECT_THROW(build_profile(v, {1.0, 0, 0}, centred_region()), PreconditionError);
}

TEST(Profile, MomentsMatchDirectQuadrature) {
  Field v = sample_analytic(grid2(), AnalyticSpec::shell({0, 0}, 3.5, 0.4));
  const Point x{0.2, -0.1, 0};
  auto p = build_profile(v, x, centred_region());
  auto rows = even_derivative_residuals(p, 3);
  for (const auto& r : rows) {
    cplx direct = moment_direct(v, x, 2 * r.m).value;
    EXPECT_LT(rel(r.direct, direct), 1e-6) << r.m;
    EXPECT_LT(rel(r.from_transform, direct), 1e-6) << r.m;
  }
}

TEST(FourierLaplace, IndicatorAtZero) {
  const double dt = 1e-3;
  std::vector<cplx> h(2001, 0.0);
  for (int j = 0; j <= 1000; ++j) h[j] = 1.0;
  h[1000] = 0.5;  // midpoint value at the jump
  auto f = RadialProfile::from_samples(0.0, dt, h, zero_tail());
  EXPECT_NEAR(std::abs(fourier_laplace(f, {0.0})[0].value - 1.0), 0.0, 1e-12);
}

TEST(FourierLaplace, EvenProfileGivesEvenTransform) {
  const double dt = 0.01;
  std::vector<cplx> h;
  for (int j = -800; j <= 800; ++j) h.push_back(std::exp(-std::pow(j * dt, 2)));
  auto f = RadialProfile::from_samples(-8.0, dt, h, zero_tail());
  for (cplx z : {cplx(0.7), cplx(1.2, 0.4), cplx(-2, 1)}) {
    auto v = fourier_laplace(f, {z, -z});
    EXPECT_LT(rel(v[0].value, v[1].value), 1e-12) << z;
  }
}

TEST(FourierLaplace, TruncatedGaussianAgainstClosedForm) {
  const double dt = 0.01, t0 = 5.0, sg = 0.5;
  std::vector<cplx> h;
  for (int j = 0; j <= 1000; ++j) h.push_back(std::exp(-std::pow(j * dt - t0, 2) / (2 * sg * sg)));
  auto f = RadialProfile::from_samples(0.0, dt, h, zero_tail());
  for (cplx z : {cplx(0.3), cplx(2.0), cplx(1.0, 0.5), cplx(-3.0, -1.0)}) {
    cplx want = std::sqrt(2 * kPi) * sg * std::exp(cplx(0, -t0) * z - sg * sg * z * z / 2.0);
    EXPECT_LT(rel(fourier_laplace(f, {z})[0].value, want), 1e-8) << z;
  }
}

TEST(FourierLaplace, StripAndCertificateChecks) {
  std::vector<cplx> h(101, 1.0);
  auto f = RadialProfile::from_samples(0.0, 0.1, h, zero_tail());
  EXPECT_THROW(fourier_laplace(f, {cplx(0, 1000)}), DomainError);
  auto g = RadialProfile::from_samples(0.0, 0.1, h, std::nullopt);
  EXPECT_THROW(fourier_laplace(g, {0.0}), PreconditionError);
  DecayCertificate c{1.0, 0.5, 2.0, false};
  auto k = RadialProfile::from_samples(0.0, 0.1, h, c);
  EXPECT_NEAR(admissible_strip(k), (0.5 * 100 - 30) / 10, 1e-12);
}

TEST(EvenMoments, OddProfileHasVanishingEvenMoments) {
  const double dt = 0.01;
  std::vector<cplx> h;
  for (int j = -600; j <= 600; ++j) h.push_back(j * dt * std::exp(-std::pow(j * dt, 2)));
  auto f = RadialProfile::from_samples(-6.0, dt, h, zero_tail());
  for (const auto& r : even_derivative_residuals(f, 8)) {
    EXPECT_LT(std::abs(r.direct) / std::pow(6.0, 2 * r.m), 1e-15) << r.m;
    EXPECT_LT(std::abs(r.from_transform) / std::pow(6.0, 2 * r.m), 1e-12) << r.m;
  }
}

TEST(EvenMoments, RampHasQuarterSecondMoment) {
  const double dt = 1e-3;
  std::vector<cplx> h(1001);
  for (int j = 0; j <= 1000; ++j) h[j] = j * dt;
  auto f = RadialProfile::from_samples(0.0, dt, h, zero_tail());
  auto rows = even_derivative_residuals(f, 1);
  EXPECT_NEAR(rows[1].direct.real(), 0.25, 1e-6);
  EXPECT_NEAR(rows[1].from_transform.real(), 0.25, 1e-6);
}

TEST(EvenMoments, ProjectedRingsHaveVanishingMoments) {
  // Radial combination of rings whose even moments 0..3 cancel.
  auto g = grid2();
  const double radii[] = {2.5, 3.5, 4.5, 5.5, 6.5};
  std::vector<Field> rings;
  for (double r : radii) rings.push_back(sample_analytic(g, AnalyticSpec::shell({0, 0}, r, 0.3)));
  const int M = 3;
  Eigen::MatrixXd A(M + 1, 5);
  for (int m = 0; m <= M; ++m)
    for (int i = 0; i < 5; ++i) A(m, i) = moment_direct(rings[i], {0, 0, 0}, 2 * m).value.real() / std::pow(6.0, 2 * m);
  Eigen::VectorXd c = Eigen::FullPivLU<Eigen::MatrixXd>(A).kernel().col(0);
  c /= c.cwiseAbs().maxCoeff();
  Field v = rings[0] * c(0);
  for (int i = 1; i < 5; ++i) v = v + rings[i] * c(i);
  auto p = build_profile(v, {0, 0, 0}, centred_region());
  for (const auto& r : even_derivative_residuals(p, M)) EXPECT_LT(r.normalized, 1e-6) << r.m;
}

TEST(CertifyVanishing, SmallMomentsCertifySmallNorm) {
  auto basis = bump_basis(0.01, 4);
  const int M = 8;
  // Moment matrix of the basis, then a member with prescribed tiny moments.
  Eigen::MatrixXcd B(M + 1, 4);
  for (int m = 0; m <= M; ++m)
    for (int i = 0; i < 4; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < basis[i].h.size(); ++j) s += basis[i].h[j] * std::pow(basis[i].t(j) / 10.0, 2 * m);
      B(m, i) = s * basis[i].dt;
    }
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double scale = 0.0;
  for (const auto& b : basis) scale = std::max(scale, b.l1_norm());
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXcd e(M + 1);
    for (int m = 0; m <= M; ++m) e(m) = nd(rng);
    e *= 1e-8 * scale / e.norm();
    Eigen::VectorXcd c = B.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(e);
    std::vector<cplx> h(basis[0].h.size(), 0.0);
    for (int i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < h.size(); ++j) h[j] += c(i) * basis[i].h[j];
    auto f = RadialProfile::from_samples(0.0, 0.01, h, zero_tail());
    auto cert = certify_vanishing(f, basis, M);
    EXPECT_TRUE(cert.in_class);
    EXPECT_LE(cert.l1_actual, cert.l1_bound);
    EXPECT_LT(cert.l1_bound, 1e-5 * scale);
  }
}

TEST(CertifyVanishing, OutsideClassRefused) {
  auto basis = bump_basis(0.01, 4);
  std::vector<cplx> h(basis[0].h.size());
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = std::sin(0.01 * j);
  auto f = RadialProfile::from_samples(0.0, 0.01, h, zero_tail());
  EXPECT_THROW(certify_vanishing(f, basis, 8), PreconditionError);
}

TEST(SupportDecision, ZeroField) {
  auto g = grid2();
  Field z = Field::zeros(g).with_decay(zero_tail());
  auto vd = support_decision(z, centred_region(), {{0, 0, 0}}, 1e-8, 1.0);
  EXPECT_TRUE(vd.zero);
  Field no_cert(g, std::vector<cplx>(g.size()));
  EXPECT_THROW(support_decision(no_cert, centred_region(), {{0, 0, 0}}, 1e-8, 1.0), PreconditionError);
}

TEST(SupportDecision, AnnulusGivesWitnessInsideRadii) {
  Field v = sample_analytic(grid2(), AnalyticSpec::shell({0, 0}, 3.5, 0.4));
  auto vd = support_decision(v, centred_region(), {{0, 0, 0}}, 1e-8, v.max_abs());
  EXPECT_FALSE(vd.zero);
  EXPECT_GT(vd.witness_t, 3.5 - 6.1 * 0.4);
  EXPECT_LT(vd.witness_t, 3.5 + 6.1 * 0.4);
}

TEST(SupportDecision, OffsetBump) {
  Field v = sample_analytic(grid2(), AnalyticSpec::bump({4, -3}, 1.5));
  auto vd = support_decision(v, centred_region(), {{0.2, 0.1, 0}, {0, 0, 0}}, 1e-8, v.max_abs());
  EXPECT_FALSE(vd.zero);
  // |x - c| = 4.90 from the first sample; allow a cell of interpolation spill.
  EXPECT_GT(vd.witness_t, 4.90 - 1.5 - 0.1);
  EXPECT_LT(vd.witness_t, 4.90 + 1.5);
}

TEST(SupportDecision, OddReflectionConstruction) {
  auto g = GridSpec::make(1, 8.0, 256);
  Field v = fixtures::odd_reflection_1d(g);
  RegionSpec r;
  r.O = {Shape::ball({0, 0, 0}, 1.5)};
  r.omega = {Shape::ball({0, 0, 0}, 0.6)};
  const double h = g.spacing();
  std::vector<Point> xs;
  for (int k = -2; k <= 2; ++k) xs.push_back({4 * k * h, 0, 0});
  auto vd = support_decision(v, r, xs, 1e-8, 1.0);
  EXPECT_TRUE(vd.zero);
  EXPECT_LT(v.max_abs(), 1e-12);
}
