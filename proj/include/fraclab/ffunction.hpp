#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/heat.hpp"

namespace fraclab {

/// Smooth-case normal form: fields v_k with fractional exponents alpha_k,
/// weights already folded into the fields.
struct FScenario {
  std::vector<Field> fields;
  std::vector<double> alphas;
  RegionSpec region;
  Point x{};
  /// Accept alpha pairs that break the separation hypothesis.
  bool allow_override = false;

  int dim() const { return fields.empty() ? 0 : fields.front().grid().dim; }
  /// Throws PreconditionError / DomainError / HypothesisError.
  void validate() const;
  /// True when no pair of alphas collides (and, for odd n, no pair is half apart).
  bool separation_holds(double tol = 1e-9) const;
};

/**
 * F(z) = sum_k Gamma(z+1+a_k) / (Gamma(-a_k) Gamma(1+a_k)) G_k(z).
 * right() uses the heat-trace Mellin integral (Re z >= 0). mero() uses the
 * closed-form time integral, which continues F to the whole plane:
 * 4^{a+z} pi^{-n/2} Gamma(z+1+a) Gamma(z+n/2+a) / (Gamma(-a) Gamma(1+a))
 * times sum_y v(y) |x-y|^{-n-2a-2z} h^n over nodes outside O.
 * Both refuse |z| > 40 (DomainError).
 */
class FFunction {
 public:
  explicit FFunction(FScenario sc, TimeQuadrature quad = {});

  const FScenario& scenario() const { return sc_; }
  std::size_t terms() const { return sc_.fields.size(); }

  QuadValue right(cplx z) const;
  QuadValue term_right(std::size_t k, cplx z) const;

  /// Throws PoleError within 1e-6 of a pole.
  cplx mero(cplx z) const;
  cplx term_mero(std::size_t k, cplx z) const;
  /// h^n sum v_k(y) |x-y|^{-n-2a_k-2z}, the spatial factor of term_mero.
  cplx kernel_integral(std::size_t k, cplx z) const;

 private:
  struct Groups {
    std::vector<double> log_r;
    std::vector<cplx> w;
  };

  FScenario sc_;
  TimeQuadrature quad_;
  std::vector<Groups> groups_;
  mutable std::vector<std::unique_ptr<HeatTrace>> traces_;
};

struct PoleDescriptor {
  cplx location{};
  int order = 1;
  int term_index = 0;
  int m = 0;
  /// Another term has a pole at the same point.
  bool coincident = false;
};

/// Poles of the k-th Gamma product for m = 0..max_m, sorted by decreasing
/// real part. Coincidences across terms are flagged and their order raised.
std::vector<PoleDescriptor> poles_of(int n, const std::vector<double>& alphas, int max_m);
std::vector<PoleDescriptor> poles_of(const FScenario& sc, int max_m);

/// The pole carrying the j-th moment of order m together with the power of
/// |x-y| in that moment.
struct MomentPole {
  cplx z0{};
  int order = 1;
  int power = 0;
};
MomentPole moment_pole(int n, double alpha, int m);

struct LadderResult {
  std::vector<double> radii;
  std::vector<cplx> averages;
  std::vector<cplx> extrapolants;
  cplx limit{};
  bool converged = false;
};

/// Averages (z-z0)^order f(z) over 8 points on circles of radius
/// 1e-1, 3e-2, 1e-2, 3e-3 and Richardson-extrapolates in r^order.
LadderResult residue_ladder(const std::function<cplx(cplx)>& f, cplx z0, int order);

/// |(z-z0)^exponent f(z)| at the single points z0 + r along the same radii.
std::vector<double> ladder_probe(const std::function<cplx(cplx)>& f, cplx z0, int exponent);

/// lim (z-z0)^order Gamma(z+1+a) Gamma(z+n/2+a) in closed form.
double gamma_pair_limit(int n, double alpha, int m);

/// 4^{a+z0} pi^{-n/2} / (Gamma(-a) Gamma(1+a)) times gamma_pair_limit.
double moment_prefactor(int n, double alpha, int m);

struct MomentResult {
  cplx moment{};
  MomentPole pole;
  LadderResult ladder;
};

/// Extracts int v_j(y) |x-y|^power dy from the residue of F at the moment
/// pole. Throws ConvergenceError listing the ladder if it does not settle.
MomentResult residue_moment(const FFunction& F, std::size_t j, int m);

struct MomentValue {
  cplx value{};
  double truncation_bound = 0.0;
};

/// h^n sum v(y) |x-y|^power. Negative powers need v to vanish within one
/// cell of x. Without a decay certificate, power >= 2 is refused.
MomentValue moment_direct(const Field& v, const Point& x, int power);

struct IntegerRow {
  int m = 0;
  cplx F{};
  double scale = 0.0;
  double relative = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct IntegerCheck {
  std::vector<IntegerRow> rows;
  double max_relative = 0.0;
  double bound_constant = 0.0;
  bool all_ok = false;
};

/// Bound constant multiplying delta in the integer check.
inline constexpr double kIntegerBoundConstant = 10.0;

/// F(m) for m = 1..M_max relative to sum_k |term_k(m)|, against C delta.
IntegerCheck check_F_at_integers(const FFunction& F, int M_max, double delta);

struct PilaReport {
  double imag_axis = 0.0;  // max log|F(ib)| / (pi |b|)
  double real_axis = 0.0;  // max log|F(a)| / (2 a log a)
  double half_plane = 0.0; // max log|F(z)| / |z|^{3/2} on |z| = 30
  double beta = -0.5;
  double alpha = 1.0;
  /// Lemma-type envelope sqrt(2 pi) e^{1/6} (2|b|)^{a+1/2} e^{-pi |b|/2}
  /// for |Gamma(1+a+ib)|, max over the imaginary-axis window.
  double imag_envelope_ratio = 0.0;
  bool zero = false;
};

/// Finite-window growth estimates; a zero scenario reports -inf everywhere.
PilaReport pila_growth_diagnostics(const FFunction& F);

/// Corrects the last field so that the normalized residuals at m = 1..M_max
/// equal delta. Test fixture for the integer check.
FScenario enforce_constraint_fixture(const FScenario& raw, int M_max, double delta,
                                     const TimeQuadrature& quad = {});

}  // namespace fraclab
