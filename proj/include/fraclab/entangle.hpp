#pragma once

#include <string>
#include <vector>

#include "fraclab/exponents.hpp"
#include "fraclab/ffunction.hpp"
#include "fraclab/spherical.hpp"

namespace fraclab {

struct SmoothReduction {
  FScenario scenario;
  double eps = 0.0;
  double eps0 = 0.0;
  HypothesisReport hypothesis;
};

/// v_k = b_k (-Delta)^{floor(s_k)} (u_k * psi_eps), fields given in the order
/// of cfg.terms(). O shrinks by eps; eps0 = margin(O, omega) - 2 kappa.
/// The integer Laplacian power is zeroed on the shrunk O, where it vanishes
/// exactly. Throws MarginError for eps >= eps0 and HypothesisError when the
/// exponents break separation without override.
SmoothReduction reduce_to_smooth(const std::vector<Field>& raw, const ExponentConfig& cfg, const RegionSpec& region,
                                 const Point& x, double eps, bool allow_override = false);

struct PipelineOptions {
  int M_max = 6;
  int moment_m_max = 4;
  double delta = 1e-8;
  double moment_tol = 1e-4;
  /// Empty means a 5-point cross of half-arm 0.4 kappa around the scenario point.
  std::vector<Point> omega_samples;
  TimeQuadrature quad;
};

struct MomentRow {
  int k = 0;
  Point x{};
  int m = 0;
  cplx z_pole{};
  cplx extracted{};
  cplx direct{};
  double rel_err = 0.0;
  /// |extracted| relative to the absolute moment h^n sum |v| r^power.
  double relative_size = 0.0;
  bool agrees = false;
  bool vanishes = false;
  std::string error;
};

struct PipelineReport {
  IntegerCheck step1;
  std::vector<MomentRow> step2;
  std::vector<SupportVerdict> step3;
  std::vector<bool> zero;  // final verdict per term
  bool step1_ok = false;
  bool step2_ok = false;  // extraction agrees with direct quadrature everywhere
  bool step2_vanish = false;
  bool step3_ok = false;
  bool all_ok = false;
  bool hypothesis_ok = true;
  bool coincident_poles = false;
  double kappa = 0.0;
  double eps0 = 0.0;
  double delta = 0.0;
  double moment_tol = 0.0;
  double truncation_bound = 0.0;
};

std::vector<Point> default_omega_samples(const FScenario& sc);

/// Step I integer residuals, Step II moments (residue vs quadrature) at each
/// omega sample, Step III support decisions. A term is ZERO only if every
/// step passes.
PipelineReport run_pipeline(const FScenario& sc, const PipelineOptions& opt = {});

std::string render_summary(const PipelineReport& r);

struct HNecessityReport {
  int dim = 2;
  std::vector<double> violating_alphas;
  std::vector<double> valid_alphas;
  int m = 1;
  double mixing_violating = 0.0;  // max over terms
  double mixing_valid = 0.0;
  double mixing_single = 0.0;
  double tolerance = 1e-4;
  bool mechanism_shown = false;  // violating > 10 tol and valid <= tol
};

/// Extracts each term's moment with and without the other term present and
/// reports the relative change.
HNecessityReport demonstrate_H_necessity(int n);

}  // namespace fraclab
