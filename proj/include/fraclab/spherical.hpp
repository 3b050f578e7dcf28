#pragma once

#include <optional>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

/// Integral of v over the sphere |y - x| = t against surface measure.
/// n = 1 uses the two points x -/+ t, n = 2 uses 256 equispaced angles and
/// n = 3 a Gauss-Legendre(15) x 30-azimuth product rule. `rotation` turns
/// the node set (azimuth offset). Throws TruncationError if the sphere
/// leaves the box.
cplx spherical_mean(const GriddingEvaluator& ev, const Point& x, double t, double rotation = 0.0);
cplx spherical_mean(const Field& v, const Point& x, double t);

/// Samples f(t) = t^{n-1} SM v(x, t) on a uniform grid t0 + j dt. f is
/// zero before t0 (and for t < 0). `decay` bounds |f(t)| by
/// C exp(-rho |t|^gamma).
struct RadialProfile {
  Point center{};
  int dim = 1;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cplx> h;
  double kappa = 0.0;
  std::optional<DecayCertificate> decay;

  double t(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  double t_end() const { return h.empty() ? t0 : t(h.size() - 1); }
  /// Largest |t| on the grid.
  double extent() const;
  double max_abs() const;
  double l1_norm() const;

  static RadialProfile from_samples(double t0, double dt, std::vector<cplx> h,
                                    std::optional<DecayCertificate> decay);
};

/// Profile with dt = h/2 up to L - max_i |x_i|. Throws MarginError if
/// |h(t)| >= 1e-12 max|h| for some t < kappa, PreconditionError if x is not
/// in omega.
RadialProfile build_profile(const Field& v, const Point& x, const RegionSpec& region);

struct FLValue {
  cplx value{};
  double tail_bound = 0.0;
};

/// Half-width of the strip |Im z| <= s where the transform is certified.
double admissible_strip(const RadialProfile& f);

/// F_f(z) = int f(t) exp(-i t z) dt by the trapezoid rule. Throws
/// PreconditionError without a decay bound and DomainError (naming the
/// strip) for |Im z| outside admissible_strip.
std::vector<FLValue> fourier_laplace(const RadialProfile& f, const std::vector<cplx>& z);

struct EvenMomentRow {
  int m = 0;
  cplx direct{};         // int f t^{2m} dt by quadrature
  cplx from_transform{}; // (2m)-th derivative of F_f at 0, via a Cauchy contour
  double normalized = 0.0;  // |direct| / (T^{2m} ||f||_1), T = extent
};

/// Rows m = 0..M_max (M_max <= 8).
std::vector<EvenMomentRow> even_derivative_residuals(const RadialProfile& f, int M_max);

struct VanishingCertificate {
  bool in_class = false;
  double class_residual = 0.0;
  double sigma_min = 0.0;
  double moment_norm = 0.0;  // ||e||_2 of normalized even moments
  double l1_bound = 0.0;
  double l1_actual = 0.0;
};

/**
 * Certified class: the span of `basis` (profiles on the same t-grid). If f
 * lies in it, its normalized even moments e_m = int f (t/T)^{2m} dt, taken
 * from Taylor coefficients of F_f, bound the coefficients through the
 * smallest singular value of the basis moment matrix, giving
 * ||f||_1 <= sqrt(K) ||e|| / sigma_min * max_i ||phi_i||_1.
 */
VanishingCertificate certify_vanishing(const RadialProfile& f, const std::vector<RadialProfile>& basis, int M_max);

struct SupportVerdict {
  bool zero = false;
  double max_abs = 0.0;
  double tolerance = 0.0;  // 1e3 delta scale
  Point witness_x{};
  double witness_t = 0.0;
  cplx witness_value{};
  int samples = 0;
};

/// ZERO if every |SM v(x,t)| with x in the samples and t on the profile
/// grid stays below 1e3 delta scale, otherwise NONZERO with the first
/// witness. Requires a decay certificate.
SupportVerdict support_decision(const Field& v, const RegionSpec& region, const std::vector<Point>& omega_samples,
                                double delta, double scale);

}  // namespace fraclab
