#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "fixtures.hpp"
#include "fraclab/decay.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/exponents.hpp"
#include "fraclab/snapshot.hpp"

using namespace fraclab;
using fixtures::rel_sup;

namespace {
const double kPi = std::numbers::pi;
GridSpec default_grid() { return GridSpec::make(2, 12.0, 256); }
GridSpec line_grid() { return GridSpec::make(1, 12.0, 256); }
}  // namespace

TEST(GridSpec, RejectsBadParameters) {
  EXPECT_THROW(GridSpec::make(4, 1.0, 16), DomainError);
  EXPECT_THROW(GridSpec::make(2, 1.0, 12), DomainError);
  EXPECT_THROW(GridSpec::make(2, 1.0, 4), DomainError);
  EXPECT_THROW(GridSpec::make(2, -1.0, 16), DomainError);
  auto g = GridSpec::make(2, 12.0, 256);
  EXPECT_EQ(g.spacing() * g.points_per_axis, 2.0 * g.half_width);
  EXPECT_EQ(g.point(g.center_index())[0], 0.0);
}

TEST(SampleAnalytic, GaussianPeakValue) {
  auto g = line_grid();
  Field u = sample_analytic(g, AnalyticSpec::parse("gaussian([0], 0.25)"));
  EXPECT_NEAR(u[g.center_index()].real(), 1.0 / std::sqrt(kPi), 1e-15);
  EXPECT_NEAR(u[g.center_index()].real(), 0.5641895835477563, 1e-12);
}

TEST(SampleAnalytic, BumpIsCompactlySupported) {
  auto g = GridSpec::make(2, 8.0, 64);
  Field u = sample_analytic(g, AnalyticSpec::parse("bump([0,0], 1)"));
  for (std::size_t i = 0; i < g.size(); ++i)
    if (norm(g.point(i), 2) >= 1.0) EXPECT_EQ(u[i], cplx(0.0));
  ASSERT_TRUE(u.decay().has_value());
  EXPECT_TRUE(u.decay()->numerically_zero_tail);
}

TEST(SampleAnalytic, GaussianHasUnitMass) {
  Field u = sample_analytic(default_grid(), AnalyticSpec::gaussian({0, 0}, 1.0));
  EXPECT_NEAR(u.integral().real(), 1.0, 1e-10);
}

TEST(SampleAnalytic, WideGaussianTriggersTruncationError) {
  EXPECT_THROW(sample_analytic(GridSpec::make(1, 4.0, 64), AnalyticSpec::gaussian({0}, 4.0)), TruncationError);
}

TEST(SampleAnalytic, DescriptorRoundTrip) {
  const char* texts[] = {"gaussian([1, -2], 0.5)", "sum(shell([0, 0], 3.5, 0.3), scale(-2, bump([1, 0], 0.5)))",
                         "polygauss([0], 1, [1])", "sine(3.1415926535897931, 0)", "zero()"};
  for (const char* t : texts) {
    auto s = AnalyticSpec::parse(t);
    EXPECT_EQ(AnalyticSpec::parse(s.to_string()).to_string(), s.to_string());
  }
  EXPECT_THROW(AnalyticSpec::parse("gaussian([0], -1)"), DomainError);
  EXPECT_THROW(AnalyticSpec::parse("blob([0], 1)"), DomainError);
}

TEST(SampleAnalytic, CertificateBoundsSamples) {
  auto g = default_grid();
  Field u = sample_analytic(g, AnalyticSpec::parse("gaussian([1.5, -2], 0.7)"));
  ASSERT_TRUE(u.decay());
  for (std::size_t i = 0; i < g.size(); i += 7)
    EXPECT_LE(std::abs(u[i]), u.decay()->bound_at(norm(g.point(i), 2)) * (1 + 1e-12));
}

TEST(FourierMultiplier, IdentitySymbol) {
  auto u = fixtures::random_bandlimited(default_grid(), 3);
  EXPECT_LT(rel_sup(fourier_multiplier(u, [](const Point&) { return cplx(1.0); }), u), 1e-14);
}

TEST(FourierMultiplier, LaplacianOfGaussian) {
  auto g = line_grid();
  Field u = sample_analytic(g, AnalyticSpec::gaussian({0}, 1.0));
  Field lap = radial_multiplier(u, [](double xi2) { return xi2; });
  std::vector<cplx> exact(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.point(i)[0];
    exact[i] = u[i] * (0.5 - x * x / 4.0);
  }
  EXPECT_LT(rel_sup(lap, Field(g, exact)), 1e-8);
}

TEST(FourierMultiplier, SingularSymbolNamesFrequency) {
  auto u = fixtures::random_bandlimited(GridSpec::make(1, 4.0, 16), 1);
  try {
    radial_multiplier(u, [](double xi2) { return 1.0 / xi2; });
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("(0)"), std::string::npos);
  }
}

TEST(FourierMultiplier, Linearity) {
  auto g = default_grid();
  auto a = fixtures::random_bandlimited(g, 5), b = fixtures::random_bandlimited(g, 6);
  cplx k(0.3, -1.7);
  auto sym = [](double xi2) { return std::exp(-0.2 * xi2) * (1.0 + xi2); };
  Field lhs = radial_multiplier(a + b * k, sym);
  Field rhs = radial_multiplier(a, sym) + radial_multiplier(b, sym) * k;
  EXPECT_LT(rel_sup(lhs, rhs), 1e-12);
}

TEST(FourierMultiplier, ParsevalHolds) {
  auto g = default_grid();
  auto u = fixtures::random_bandlimited(g, 11, 40);
  auto c = fft_forward(g, u.values());
  double s = 0.0, t = 0.0;
  for (const auto& v : u.values()) s += std::norm(v);
  for (const auto& v : c) t += std::norm(v);
  t /= static_cast<double>(g.size());
  EXPECT_NEAR(s, t, 1e-12 * s);
  auto back = fft_inverse(g, c);
  EXPECT_LT(rel_sup(Field(g, back), u), 1e-14);
}

TEST(FracLapFourier, OrderZeroIsIdentity) {
  auto u = fixtures::random_bandlimited(default_grid(), 2);
  EXPECT_EQ(rel_sup(frac_lap_fourier(u, 0.0), u), 0.0);
}

TEST(FracLapFourier, OrderOneIsMinusLaplacian) {
  auto g = default_grid();
  Field u = sample_analytic(g, AnalyticSpec::gaussian({0.5, -1.0}, 1.0));
  std::vector<cplx> exact(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    double r2 = (p[0] - 0.5) * (p[0] - 0.5) + (p[1] + 1.0) * (p[1] + 1.0);
    exact[i] = u[i] * (1.0 - r2 / 4.0);
  }
  EXPECT_LT(rel_sup(frac_lap_fourier(u, 1.0), Field(g, exact)), 1e-8);
}

TEST(FracLapFourier, HalfOrderAgainstFrequencySum) {
  // Independent oracle: the Gaussian's transform is exp(-xi^2) to double
  // precision at every lattice frequency, so the periodic value at 0 is the
  // lattice sum (1/2L) sum |xi_k| exp(-xi_k^2).
  auto g = line_grid();
  Field u = sample_analytic(g, AnalyticSpec::gaussian({0}, 1.0));
  cplx v = frac_lap_fourier(u, 0.5)[g.center_index()];
  double lattice = 0.0;
  for (int k = -g.points_per_axis / 2; k < g.points_per_axis / 2; ++k) {
    double xi = kPi / g.half_width * k;
    lattice += std::abs(xi) * std::exp(-xi * xi);
  }
  lattice /= 2.0 * g.half_width;
  EXPECT_NEAR(v.real(), lattice, 1e-12 * lattice);
  EXPECT_NEAR(v.imag(), 0.0, 1e-14);
  // The continuum value 1/(2 pi) differs by the lattice quadrature error of
  // the kink of |xi| at the origin.
  EXPECT_NEAR(v.real(), 1.0 / (2.0 * kPi), 0.02 / (2.0 * kPi));
}

TEST(FracLapFourier, CompositionLaw) {
  auto g = default_grid();
  auto u = fixtures::random_bandlimited(g, 7, 20);
  const double orders[] = {0.1, 0.25, 0.5, 0.75, 1.3};
  for (double s : orders)
    for (double t : orders)
      EXPECT_LT(rel_sup(frac_lap_fourier(frac_lap_fourier(u, s), t), frac_lap_fourier(u, s + t)), 1e-10);
}

TEST(Exponents, ExamplesFromHypothesis) {
  auto r1 = validate_exponents(ExponentConfig({{0.3, 1.0}, {1.3, 1.0}}), 2);
  EXPECT_FALSE(r1.ok);
  ASSERT_EQ(r1.violations.size(), 1u);
  EXPECT_NEAR(r1.violations[0].difference, 1.0, 1e-12);
  EXPECT_FALSE(validate_exponents(ExponentConfig({{0.2, 1.0}, {0.7, 1.0}}), 3).ok);
  EXPECT_TRUE(validate_exponents(ExponentConfig({{0.3, 1.0}, {0.75, 1.0}}), 2).ok);
  EXPECT_TRUE(validate_exponents(ExponentConfig({{0.2, 1.0}, {0.7, 1.0}}), 2).ok);
  EXPECT_THROW(ExponentConfig({{2.0, 1.0}}), DomainError);
  EXPECT_THROW(ExponentConfig({{0.5, 0.0}}), DomainError);
  ExponentConfig c({{1.3, 2.0}, {0.3, 1.0}});
  EXPECT_EQ(c.terms()[0].s, 0.3);
  EXPECT_EQ(c.terms()[1].floor(), 1);
  EXPECT_NEAR(c.terms()[1].alpha(), 0.3, 1e-15);
}

TEST(Exponents, PermutationInvariant) {
  std::vector<ExponentTerm> t = {{0.3, 1.0}, {1.8, 1.0}, {2.3, 1.0}, {0.55, 1.0}};
  auto base = validate_exponents(ExponentConfig(t), 3);
  std::sort(t.begin(), t.end(), [](auto& a, auto& b) { return a.s < b.s; });
  do {
    auto r = validate_exponents(ExponentConfig(t), 3);
    ASSERT_EQ(r.violations.size(), base.violations.size());
    for (std::size_t i = 0; i < r.violations.size(); ++i) {
      EXPECT_EQ(r.violations[i].j, base.violations[i].j);
      EXPECT_EQ(r.violations[i].k, base.violations[i].k);
    }
  } while (std::next_permutation(t.begin(), t.end(), [](auto& a, auto& b) { return a.s < b.s; }));
}

TEST(DecayFit, GaussianIsSuperExponential) {
  Field u = sample_analytic(default_grid(), AnalyticSpec::gaussian({0, 0}, 1.0));
  auto f = fit_super_exp_decay(u);
  EXPECT_TRUE(f.success) << f.reason;
  EXPECT_NEAR(f.certificate.gamma, 2.0, 0.1);
  EXPECT_GE(f.shells_used, 3);
}

TEST(DecayFit, ExponentialFails) {
  Field u = sample_analytic(default_grid(), AnalyticSpec::parse("expdecay([0,0], 1)"));
  auto f = fit_super_exp_decay(u);
  EXPECT_FALSE(f.success);
  EXPECT_NEAR(f.certificate.gamma, 1.0, 0.05);
}

TEST(DecayFit, BumpGivesZeroTail) {
  Field u = sample_analytic(default_grid(), AnalyticSpec::bump({0, 0}, 2.0));
  auto f = fit_super_exp_decay(u);
  EXPECT_TRUE(f.success);
  EXPECT_TRUE(f.certificate.numerically_zero_tail);
  EXPECT_DOUBLE_EQ(f.certificate.C, u.max_abs());
}

TEST(Mollify, ConstantUnchanged) {
  auto g = GridSpec::make(2, 4.0, 64);
  Field one = sample_analytic(g, AnalyticSpec::parse("const(1)"));
  EXPECT_LT(rel_sup(mollify(one, 0.4, 1.0), one), 1e-13);
}

TEST(Mollify, SupportGrowsByAtMostEps) {
  auto g = GridSpec::make(2, 8.0, 128);
  // Vanishes on the ball of radius 2.
  Field u = sample_analytic(g, AnalyticSpec::bump({4.5, 0}, 2.5));
  const double r = 2.0;
  Field m = mollify(u, r / 2, 1.5);
  double inside = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (norm(g.point(i), 2) < r / 2) inside = std::max(inside, std::abs(m[i]));
  EXPECT_LT(inside, 1e-15 * u.max_abs());
  EXPECT_NEAR(m.integral().real(), u.integral().real(), 1e-12 * std::abs(u.integral()));
  EXPECT_THROW(mollify(u, 1.5, 1.5), MarginError);
}

TEST(Mollify, ConvergesAsEpsShrinks) {
  auto g = GridSpec::make(2, 8.0, 128);
  Field u = sample_analytic(g, AnalyticSpec::gaussian({0, 0}, 0.5));
  double prev = 1e300;
  for (double eps : {1.0, 0.5, 0.25, 0.125}) {
    double d = fixtures::sup_diff(mollify(u, eps, 2.0), u);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 2e-3 * u.max_abs());
}

TEST(Mollify, CommutesWithFractionalLaplacian) {
  auto g = default_grid();
  auto u = fixtures::random_bandlimited(g, 9, 30);
  Field a = mollify(frac_lap_fourier(u, 0.37), 0.5, 1.0);
  Field b = frac_lap_fourier(mollify(u, 0.5, 1.0), 0.37);
  EXPECT_LT(rel_sup(a, b), 1e-10);
}

TEST(Region, MarginValidation) {
  auto g = GridSpec::make(2, 8.0, 64);
  RegionSpec r;
  r.O = {Shape::ball({0, 0, 0}, 2.0)};
  r.omega = {Shape::ball({0, 0, 0}, 0.5)};
  r.kappa = 0.4;
  EXPECT_NO_THROW(r.validate(g));
  r.kappa = 0.9;
  EXPECT_THROW(r.validate(g), MarginError);
  r.kappa = 0.4;
  r.omega = {Shape::ball({1.8, 0, 0}, 0.5)};
  EXPECT_THROW(r.validate(g), MarginError);
}

TEST(FourierEvaluator, InterpolatesExactlyAtNodesAndSmoothlyBetween) {
  auto g = GridSpec::make(2, 8.0, 128);
  auto spec = AnalyticSpec::gaussian({0.3, -0.2}, 0.5);
  Field u = sample_analytic(g, spec);
  FourierEvaluator ev(u);
  for (std::size_t i : {std::size_t(0), g.center_index(), std::size_t(12345)})
    EXPECT_NEAR(std::abs(ev(g.point(i)) - u[i]), 0.0, 1e-14);
  for (Point p : {Point{0.123, -0.456, 0}, Point{1.7, 2.9, 0}, Point{-3.31, 0.01, 0}})
    EXPECT_NEAR(ev(p).real(), spec.eval(p, 2), 1e-13);
}

TEST(Snapshot, RoundTrip) {
  auto g = GridSpec::make(2, 6.0, 32);
  Field u = sample_analytic(g, AnalyticSpec::gaussian({0, 0}, 0.2)) + fixtures::random_bandlimited(g, 4) * 1e-30;
  u = u.with_decay(DecayCertificate{1.0, 0.1, 2.0, false});
  std::string path = ::testing::TempDir() + "snap.frl";
  write_snapshot(path, u);
  Field v = read_snapshot(path);
  EXPECT_EQ(v.grid(), g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(u[i], v[i]);
  EXPECT_TRUE(v.decay().has_value());
  std::FILE* f = std::fopen(path.c_str(), "rb");
  char magic[5] = {0};
  ASSERT_EQ(std::fread(magic, 1, 4, f), 4u);
  std::fclose(f);
  EXPECT_STREQ(magic, "FRL1");
}

TEST(GriddingEvaluator, MatchesDirectSummation) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    auto g = GridSpec::make(n, 5.0, n == 3 ? 16 : 64);
    Field u = fixtures::random_bandlimited(g, 3 + n, n == 3 ? 8 : 32);
    FourierEvaluator direct(u);
    GriddingEvaluator fast(u);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      Point p{pos(rng), pos(rng), pos(rng)};
      worst = std::max(worst, std::abs(direct(p) - fast(p)));
    }
    EXPECT_LT(worst / u.max_abs(), 1e-11) << n;
  }
}
