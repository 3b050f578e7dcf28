#pragma once

#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/**
 * Log-time trapezoid rule. With t = e^u the nodes are u_min + j du on
 * [u_min, u_max]; u = log(split_point) = 0 is a node, so the (0,1] and
 * [1,inf) halves share it. Integrands whose asymptotics are known beyond the
 * window are continued by closed-form geometric sums over the missing nodes,
 * which turns the rule into the infinite trapezoid sum.
 */
struct TimeQuadrature {
  double split_point = 1.0;
  double u_min = -40.0;
  double u_max = 40.0;
  int nodes = 2048;
  double target_tol = 1e-8;
  int max_refinements = 4;

  void validate() const;
  double step(int level) const { return (u_max - u_min) / (static_cast<double>(nodes) * (1 << level)); }
  int count(int level) const { return nodes * (1 << level) + 1; }
};

struct QuadValue {
  cplx value{};
  double error_estimate = 0.0;
  int nodes_used = 0;
  /// Spatial truncation bound from the decay certificate (infinite if none).
  double truncation_bound = 0.0;
};

/// (4 pi t)^{-n/2} exp(-|y|^2 / 4t).
double heat_kernel_value(double t, const Point& y, int n);

/// Periodic heat semigroup, multiplier exp(-t |xi|^2).
Field heat_evolve(const Field& u, double t);

/// (-Delta)^s u(x) from the heat-semigroup integral
/// (1/Gamma(-s)) int_0^inf (e^{t Delta} u(x) - u(x)) t^{-1-s} dt
/// using the periodic semigroup at x. Throws QuadratureError on failure.
QuadValue frac_lap_heat(const Field& u, double s, const Point& x, const TimeQuadrature& quad = {});

/**
 * Free-space heat trace H(t) = (e^{t Delta} v)(x) = h^n sum_y p_t(x - y) v(y)
 * tabulated on the log-time nodes, so that Mellin-type integrals
 * int_0^inf H(t) t^{-w-1} dt can be evaluated for many w.
 */
class HeatTrace {
 public:
  HeatTrace(const Field& v, const Point& x, const TimeQuadrature& quad,
            const std::vector<Shape>& exclude = {});

  /// int_0^inf H(t) t^{-w} dt / t with Re w > -n/2.
  QuadValue mellin(cplx w) const;

  /// Checks |H(t)| <= (4 pi t)^{-n/2} ||v||_1 exp(-kappa^2 / t) at every node.
  bool heat_bound_holds(double kappa) const;
  double l1_norm() const { return l1_; }
  cplx mass() const { return mass_; }

 private:
  void extend_to(int level) const;
  cplx log_trace(double u) const;

  TimeQuadrature quad_;
  int dim_;
  std::vector<double> r2_;
  std::vector<cplx> w_;
  cplx mass_{};
  double l1_ = 0.0;
  mutable int level_ = -1;
  mutable std::vector<cplx> logH_;  // finest level, -inf real part means zero
};

/// G(z) = int_0^inf (e^{t Delta} v)(x) t^{-(z+1+alpha)} dt for Re z >= 0.
QuadValue mellin_G(const Field& v, double alpha, cplx z, const Point& x, const RegionSpec& region,
                   const TimeQuadrature& quad = {});

/// Gamma(m+1+alpha) / Gamma(1+alpha).
double ibp_constant(double alpha, int m);

struct IbpResult {
  cplx lhs{};
  cplx rhs{};
  double residual = 0.0;
};

/// Compares int (e^{t Delta} Delta^m v)(x) t^{-1-alpha} dt with
/// c int (e^{t Delta} v)(x) t^{-m-1-alpha} dt, c = ibp_constant(alpha, m).
IbpResult ibp_identity_residual(const Field& v, double alpha, int m, const Point& x, const RegionSpec& region,
                                const TimeQuadrature& quad = {});

}  // namespace fraclab
