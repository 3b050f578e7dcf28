#include "fraclab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fraclab/errors.hpp"
#include "fraclab/gamma.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExpFloor = 745.0;

// Trapezoid refinement in u, reusing all previous nodes.
template <class Eval, class Tail>
QuadValue refine_trapezoid(const TimeQuadrature& q, Eval&& g, Tail&& tail) {
  double step = q.step(0);
  cplx S = 0.0;
  double A = 0.0;
  for (int j = 0; j < q.count(0); ++j) {
    cplx v = g(q.u_min + j * step);
    S += v;
    A += std::abs(v);
  }
  cplx prev = step * S + tail(step);
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= q.max_refinements; ++level) {
    step = q.step(level);
    for (int j = 1; j < q.count(level); j += 2) {
      cplx v = g(q.u_min + j * step);
      S += v;
      A += std::abs(v);
    }
    cplx cur = step * S + tail(step);
    err = std::abs(cur - prev);
    if (err <= q.target_tol * std::max(std::abs(cur), step * A)) return {cur, err, q.count(level), 0.0};
    prev = cur;
  }
  throw QuadratureError("log-time quadrature did not reach tolerance", err);
}

// sum_{j >= 1} step * exp(-a (u0 + j step)), Re a > 0.
cplx geometric_tail(double step, double u0, cplx a) {
  cplx q = std::exp(-step * a);
  return step * std::exp(-u0 * a) * q / (1.0 - q);
}

}  // namespace

void TimeQuadrature::validate() const {
  if (!(u_min < 0.0 && u_max > 0.0)) throw DomainError("time window must straddle the split point t = 1");
  if (nodes < 8 || nodes % 2 != 0) throw DomainError("node count must be even and >= 8");
  if (!(target_tol > 0.0)) throw DomainError("target tolerance must be positive");
  if (max_refinements < 1) throw DomainError("at least one refinement is required");
  if (split_point != 1.0) throw DomainError("split point is fixed at t = 1");
}

double heat_kernel_value(double t, const Point& y, int n) {
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) r2 += y[d] * y[d];
  return std::pow(4.0 * kPi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

Field heat_evolve(const Field& u, double t) {
  if (!(t >= 0.0)) throw DomainError("heat time must be nonnegative");
  if (t == 0.0) return u;
  Field out = radial_multiplier(u, [t](double xi2) { return std::exp(-t * xi2); });
  return out.with_decay(u.decay());
}

QuadValue frac_lap_heat(const Field& u, double s, const Point& x, const TimeQuadrature& quad) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("frac_lap_heat needs s in (0,1)");
  quad.validate();
  const auto& g = u.grid();
  auto c = fft_forward(g, u.values());
  const auto freq = frequencies(g);
  const int M = g.points_per_axis;
  const double inv = 1.0 / static_cast<double>(g.size());

  // Mode coefficients at x, grouped by |xi|^2.
  std::vector<std::pair<double, cplx>> modes(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    std::size_t rem = k;
    double lam = 0.0, phase = 0.0;
    for (int d = g.dim - 1; d >= 0; --d) {
      double xi = freq[rem % M];
      rem /= M;
      lam += xi * xi;
      phase += xi * (x[d] + g.half_width);
    }
    modes[k] = {lam, c[k] * inv * std::polar(1.0, phase)};
  }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> lam;
  std::vector<cplx> coef;
  for (const auto& [l, v] : modes) {
    if (!lam.empty() && lam.back() == l)
      coef.back() += v;
    else {
      lam.push_back(l);
      coef.push_back(v);
    }
  }
  cplx C0 = 0.0, D = 0.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] > 0.0) C0 += coef[i];
    D += coef[i] * lam[i];
  }

  auto integrand = [&](double uu) {
    const double t = std::exp(uu);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      if (lam[i] == 0.0) continue;
      acc += coef[i] * std::expm1(-lam[i] * t);
    }
    return acc * std::exp(-s * uu);
  };
  // Beyond u_max the integrand is -C0 e^{-s u}; below u_min it is -D e^{(1-s) u}.
  auto tails = [&](double step) {
    cplx right = -C0 * geometric_tail(step, quad.u_max, s);
    cplx left = -D * geometric_tail(step, -quad.u_min, 1.0 - s);
    return right + left;
  };
  QuadValue r = refine_trapezoid(quad, integrand, tails);
  const double gm = std::tgamma(-s);
  r.value /= gm;
  r.error_estimate /= std::abs(gm);
  r.truncation_bound = u.truncation_bound();
  return r;
}

HeatTrace::HeatTrace(const Field& v, const Point& x, const TimeQuadrature& quad, const std::vector<Shape>& exclude)
    : quad_(quad), dim_(v.grid().dim) {
  quad_.validate();
  const auto& g = v.grid();
  const double hn = g.cell_volume();
  std::vector<std::pair<double, cplx>> pts;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v[i] == 0.0) continue;
    Point p = g.point(i);
    if (!exclude.empty() && in_union(exclude, p, g.dim)) continue;
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) r2 += (p[d] - x[d]) * (p[d] - x[d]);
    pts.emplace_back(r2, v[i] * hn);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [r2, w] : pts) {
    mass_ += w;
    l1_ += std::abs(w);
    if (!r2_.empty() && r2_.back() == r2)
      w_.back() += w;
    else {
      r2_.push_back(r2);
      w_.push_back(w);
    }
  }
}

cplx HeatTrace::log_trace(double u) const {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (r2_.empty()) return {ninf, 0.0};
  const double t = std::exp(u);
  const double r0 = r2_[0];
  cplx S = 0.0;
  for (std::size_t i = 0; i < r2_.size(); ++i) {
    double e = (r2_[i] - r0) / (4.0 * t);
    if (e > kExpFloor) break;
    S += w_[i] * std::exp(-e);
  }
  if (S == 0.0) return {ninf, 0.0};
  return -0.5 * dim_ * std::log(4.0 * kPi * t) - r0 / (4.0 * t) + std::log(S);
}

void HeatTrace::extend_to(int level) const {
  if (level <= level_) return;
  std::vector<cplx> fresh(quad_.count(level));
  const double step = quad_.step(level);
  const int stride = level_ < 0 ? 0 : 1 << (level - level_);
  for (int j = 0; j < quad_.count(level); ++j) {
    if (stride > 0 && j % stride == 0)
      fresh[j] = logH_[j / stride];
    else
      fresh[j] = log_trace(quad_.u_min + j * step);
  }
  logH_.swap(fresh);
  level_ = level;
}

QuadValue HeatTrace::mellin(cplx w) const {
  if (r2_.empty()) return {};
  const double half_n = 0.5 * dim_;
  if (!(w.real() + half_n > 0.0)) throw DomainError("Mellin exponent outside the convergence strip");
  const cplx K = std::pow(4.0 * kPi, -half_n) * mass_;
  auto level_sum = [&](int level, double& A) {
    extend_to(level);
    const int stride = 1 << (level_ - level);
    const double step = quad_.step(level);
    cplx S = 0.0;
    A = 0.0;
    for (int j = 0; j < quad_.count(level); ++j) {
      const cplx lh = logH_[static_cast<std::size_t>(j) * stride];
      if (std::isinf(lh.real())) continue;
      cplx v = std::exp(lh - (quad_.u_min + j * step) * w);
      S += v;
      A += std::abs(v);
    }
    A *= step;
    return step * S + K * geometric_tail(step, quad_.u_max, w + half_n);
  };
  double A = 0.0;
  cplx prev = level_sum(0, A);
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= quad_.max_refinements; ++level) {
    cplx cur = level_sum(level, A);
    err = std::abs(cur - prev);
    if (err <= quad_.target_tol * std::max(std::abs(cur), A)) return {cur, err, quad_.count(level), 0.0};
    prev = cur;
  }
  throw QuadratureError("Mellin quadrature did not reach tolerance", err);
}

bool HeatTrace::heat_bound_holds(double kappa) const {
  if (r2_.empty()) return true;
  extend_to(std::max(level_, 0));
  const double step = quad_.step(level_);
  for (int j = 0; j < quad_.count(level_); ++j) {
    const double lh = logH_[j].real();
    if (std::isinf(lh)) continue;
    const double u = quad_.u_min + j * step, t = std::exp(u);
    const double bound = -0.5 * dim_ * std::log(4.0 * kPi * t) + std::log(l1_) - kappa * kappa / t;
    if (lh > bound + 1e-10) return false;
  }
  return true;
}

namespace {
void check_scenario_inputs(const Field& v, double alpha, const Point& x, const RegionSpec& region) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  const int n = v.grid().dim;
  if (!region.in_omega(x, n)) throw PreconditionError("evaluation point is not in omega");
  const double peak = v.max_abs();
  if (max_abs_on(v, region.O) > 1e-10 * peak) throw PreconditionError("field does not vanish on O");
}
}  // namespace

QuadValue mellin_G(const Field& v, double alpha, cplx z, const Point& x, const RegionSpec& region,
                   const TimeQuadrature& quad) {
  if (z.real() < 0.0) throw DomainError("mellin_G needs Re z >= 0; use the meromorphic form instead");
  check_scenario_inputs(v, alpha, x, region);
  HeatTrace tr(v, x, quad, region.O);
  QuadValue r = tr.mellin(z + alpha);
  r.truncation_bound = v.truncation_bound();
  return r;
}

double ibp_constant(double alpha, int m) {
  return std::exp(log_gamma(m + 1.0 + alpha) - log_gamma(1.0 + alpha)).real();
}

IbpResult ibp_identity_residual(const Field& v, double alpha, int m, const Point& x, const RegionSpec& region,
                                const TimeQuadrature& quad) {
  if (m < 1 || m > 6) throw DomainError("integration-by-parts order must be in 1..6");
  check_scenario_inputs(v, alpha, x, region);
  // Delta^m v is zero on O analytically; drop the spectral round-off there so
  // that the t^{-1-alpha} weight does not amplify it.
  Field lap = laplacian_power(v, m);
  std::vector<cplx> masked(lap.values());
  const auto& g = v.grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (region.in_O(g.point(i), g.dim)) masked[i] = 0.0;
  Field w(g, std::move(masked));

  IbpResult r;
  r.lhs = HeatTrace(w, x, quad, region.O).mellin(alpha).value;
  r.rhs = ibp_constant(alpha, m) * HeatTrace(v, x, quad, region.O).mellin(m + alpha).value;
  const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
  r.residual = scale == 0.0 ? 0.0 : std::abs(r.lhs - r.rhs) / scale;
  return r;
}

}  // namespace fraclab
