#include "fraclab/ffunction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fraclab/decay.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/gamma.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-6;
constexpr double kCoincidence = 1e-9;
constexpr int kMomentCap = 8;
constexpr double kLadderRadii[4] = {1e-1, 3e-2, 1e-2, 3e-3};
constexpr int kLadderPoints = 8;
constexpr double kLadderTol = 1e-4;
constexpr double kZCap = 40.0;

void check_z_cap(cplx z) {
  if (std::abs(z) > kZCap) throw DomainError("F is only evaluated for |z| <= 40");
}

void check_pole_distance(cplx w) {
  // w is the argument of a Gamma factor.
  if (w.real() > 0.5) return;
  const double k = std::round(w.real());
  if (k <= 0.0 && std::abs(w - cplx(k, 0.0)) < kPoleGuard)
    throw PoleError("F evaluated within 1e-6 of a pole; use residue_moment for the limit");
}

cplx log_term_prefactor(double a) { return -log_gamma(-a) - log_gamma(1.0 + a); }

double sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    default: return 4.0 * kPi;
  }
}

}  // namespace

bool FScenario::separation_holds(double tol) const {
  const int n = dim();
  for (std::size_t j = 0; j < alphas.size(); ++j)
    for (std::size_t k = j + 1; k < alphas.size(); ++k) {
      const double d = std::abs(alphas[j] - alphas[k]);
      if (d < tol) return false;
      if (n % 2 == 1 && std::abs(d - 0.5) < tol) return false;
    }
  return true;
}

void FScenario::validate() const {
  if (fields.empty()) throw PreconditionError("scenario has no fields");
  if (fields.size() != alphas.size()) throw PreconditionError("one alpha is needed per field");
  const GridSpec& g = fields.front().grid();
  for (const auto& f : fields)
    if (!(f.grid() == g)) throw PreconditionError("scenario fields live on different grids");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw DomainError("fractional parts must lie in (0,1)");
  if (!region.in_omega(x, g.dim)) throw PreconditionError("evaluation point is not in omega");
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const double peak = fields[k].max_abs();
    if (max_abs_on(fields[k], region.O) > 1e-10 * peak)
      throw PreconditionError("field " + std::to_string(k + 1) + " does not vanish on O");
  }
  if (!allow_override && !separation_holds())
    throw HypothesisError("fractional parts collide (or sit half apart in odd dimension)");
}

FFunction::FFunction(FScenario sc, TimeQuadrature quad) : sc_(std::move(sc)), quad_(quad) {
  sc_.validate();
  quad_.validate();
  const GridSpec& g = sc_.fields.front().grid();
  const double hn = g.cell_volume();
  for (const auto& v : sc_.fields) {
    std::vector<std::pair<double, cplx>> pts;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (v[i] == 0.0) continue;
      Point p = g.point(i);
      if (sc_.region.in_O(p, g.dim)) continue;
      double r2 = 0.0;
      for (int d = 0; d < g.dim; ++d) r2 += (p[d] - sc_.x[d]) * (p[d] - sc_.x[d]);
      pts.emplace_back(r2, v[i] * hn);
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Groups gr;
    double last = -1.0;
    for (const auto& [r2, w] : pts) {
      if (r2 == last) {
        gr.w.back() += w;
      } else {
        gr.log_r.push_back(0.5 * std::log(r2));
        gr.w.push_back(w);
        last = r2;
      }
    }
    groups_.push_back(std::move(gr));
  }
  traces_.resize(sc_.fields.size());
}

QuadValue FFunction::term_right(std::size_t k, cplx z) const {
  if (z.real() < 0.0) throw DomainError("right-half-plane form needs Re z >= 0");
  check_z_cap(z);
  if (groups_[k].w.empty()) return {};
  if (!traces_[k]) traces_[k] = std::make_unique<HeatTrace>(sc_.fields[k], sc_.x, quad_, sc_.region.O);
  const double a = sc_.alphas[k];
  QuadValue G = traces_[k]->mellin(z + a);
  const cplx pref = std::exp(log_gamma(z + 1.0 + a) + log_term_prefactor(a));
  QuadValue r;
  r.value = pref * G.value;
  r.error_estimate = std::abs(pref) * G.error_estimate;
  r.nodes_used = G.nodes_used;
  r.truncation_bound = std::abs(pref) * sc_.fields[k].truncation_bound();
  return r;
}

QuadValue FFunction::right(cplx z) const {
  QuadValue total;
  for (std::size_t k = 0; k < terms(); ++k) {
    QuadValue t = term_right(k, z);
    total.value += t.value;
    total.error_estimate += t.error_estimate;
    total.truncation_bound += t.truncation_bound;
    total.nodes_used = std::max(total.nodes_used, t.nodes_used);
  }
  return total;
}

cplx FFunction::kernel_integral(std::size_t k, cplx z) const {
  const auto& gr = groups_[k];
  const cplx e = -(static_cast<double>(sc_.dim()) + 2.0 * sc_.alphas[k] + 2.0 * z);
  cplx S = 0.0;
  for (std::size_t i = 0; i < gr.w.size(); ++i) S += gr.w[i] * std::exp(e * gr.log_r[i]);
  return S;
}

cplx FFunction::term_mero(std::size_t k, cplx z) const {
  const double a = sc_.alphas[k];
  const double half_n = 0.5 * sc_.dim();
  check_z_cap(z);
  check_pole_distance(z + 1.0 + a);
  check_pole_distance(z + half_n + a);
  if (groups_[k].w.empty()) return 0.0;
  const cplx lp = (a + z) * std::log(4.0) - half_n * std::log(kPi) + log_gamma(z + 1.0 + a) +
                  log_gamma(z + half_n + a) + log_term_prefactor(a);
  return std::exp(lp) * kernel_integral(k, z);
}

cplx FFunction::mero(cplx z) const {
  cplx s = 0.0;
  for (std::size_t k = 0; k < terms(); ++k) s += term_mero(k, z);
  return s;
}

std::vector<PoleDescriptor> poles_of(int n, const std::vector<double>& alphas, int max_m) {
  if (max_m < 0) throw DomainError("max_m must be nonnegative");
  std::vector<PoleDescriptor> out;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    std::vector<PoleDescriptor> mine;
    auto add = [&](double loc, int m) {
      for (auto& p : mine)
        if (std::abs(p.location.real() - loc) < kCoincidence) {
          p.order += 1;
          return;
        }
      mine.push_back({cplx(loc, 0.0), 1, static_cast<int>(k), m, false});
    };
    for (int m = 0; m <= max_m; ++m) {
      add(-alphas[k] - m - 1.0, m);
      add(-alphas[k] - m - 0.5 * n, m);
    }
    out.insert(out.end(), mine.begin(), mine.end());
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j)
      if (out[i].term_index != out[j].term_index && std::abs(out[i].location - out[j].location) < kCoincidence) {
        out[i].coincident = out[j].coincident = true;
        const int o = std::max(out[i].order, out[j].order);
        out[i].order = out[j].order = o;
      }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.location.real() != b.location.real()) return a.location.real() > b.location.real();
    return a.term_index < b.term_index;
  });
  return out;
}

std::vector<PoleDescriptor> poles_of(const FScenario& sc, int max_m) {
  return poles_of(sc.dim(), sc.alphas, max_m);
}

MomentPole moment_pole(int n, double alpha, int m) {
  if (m < 0 || m > kMomentCap) throw DomainError("moment order must be in 0..8");
  if (n % 2 == 0) {
    const int p = n / 2;
    return {cplx(-m - p - alpha, 0.0), 2, 2 * m};
  }
  const int p = (n + 1) / 2;
  return {cplx(-m - 1.0 - alpha, 0.0), 1, 2 * m - 2 * p + 3};
}

LadderResult residue_ladder(const std::function<cplx(cplx)>& f, cplx z0, int order) {
  LadderResult L;
  for (double r : kLadderRadii) {
    cplx s = 0.0;
    for (int j = 0; j < kLadderPoints; ++j) {
      const cplx d = std::polar(r, kPi / kLadderPoints + 2.0 * kPi * j / kLadderPoints);
      s += std::pow(d, order) * f(z0 + d);
    }
    L.radii.push_back(r);
    L.averages.push_back(s / static_cast<double>(kLadderPoints));
  }
  for (std::size_t i = 0; i + 1 < L.averages.size(); ++i) {
    const double a = std::pow(L.radii[i], order), b = std::pow(L.radii[i + 1], order);
    L.extrapolants.push_back((a * L.averages[i + 1] - b * L.averages[i]) / (a - b));
  }
  const cplx last = L.extrapolants.back(), prev = L.extrapolants[L.extrapolants.size() - 2];
  L.limit = last;
  const double scale = std::max(std::abs(last), std::abs(prev));
  L.converged = scale == 0.0 || std::abs(last - prev) <= kLadderTol * scale;
  return L;
}

std::vector<double> ladder_probe(const std::function<cplx(cplx)>& f, cplx z0, int exponent) {
  std::vector<double> out;
  for (double r : kLadderRadii) {
    const cplx d = std::polar(r, kPi / kLadderPoints);
    out.push_back(std::abs(std::pow(d, exponent) * f(z0 + d)));
  }
  return out;
}

double gamma_pair_limit(int n, double alpha, int m) {
  (void)alpha;
  double mf = std::tgamma(m + 1.0);
  if (n % 2 == 0) {
    const int p = n / 2;
    return (p % 2 == 1 ? 1.0 : -1.0) / (mf * std::tgamma(m + p + 0.0));
  }
  const int p = (n + 1) / 2;
  return (m % 2 == 0 ? 1.0 : -1.0) / mf * std::tgamma(p - m - 1.5);
}

double moment_prefactor(int n, double alpha, int m) {
  const MomentPole pole = moment_pole(n, alpha, m);
  const double z0 = pole.z0.real();
  return std::pow(4.0, alpha + z0) * std::pow(kPi, -0.5 * n) / (std::tgamma(-alpha) * std::tgamma(1.0 + alpha)) *
         gamma_pair_limit(n, alpha, m);
}

MomentResult residue_moment(const FFunction& F, std::size_t j, int m) {
  if (j >= F.terms()) throw DomainError("term index out of range");
  const int n = F.scenario().dim();
  const double a = F.scenario().alphas[j];
  MomentResult r;
  r.pole = moment_pole(n, a, m);
  r.ladder = residue_ladder([&](cplx z) { return F.mero(z); }, r.pole.z0, r.pole.order);
  if (!r.ladder.converged) {
    std::ostringstream os;
    os.precision(17);
    os << "residue ladder did not converge at z0 = " << r.pole.z0.real() << "; extrapolants:";
    for (const auto& e : r.ladder.extrapolants) os << ' ' << e;
    throw ConvergenceError(os.str());
  }
  r.moment = r.ladder.limit / moment_prefactor(n, a, m);
  return r;
}

MomentValue moment_direct(const Field& v, const Point& x, int power) {
  if (power > 2 * kMomentCap + 1) throw DomainError("moment power above the supported cap");
  const auto& cert = v.decay();
  if (power >= 2 && !cert) throw PreconditionError("moment needs a decay certificate");
  const GridSpec& g = v.grid();
  const double h = g.spacing();
  MomentValue out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double r = distance(g.point(i), x, g.dim);
    if (power < 0 && r < h) throw PreconditionError("negative-power moment needs v = 0 near x");
    out.value += v[i] * std::pow(r, power);
  }
  out.value *= g.cell_volume();
  if (cert && !cert->numerically_zero_tail) {
    // Tail beyond the inscribed ball |y| >= L, radial trapezoid.
    const double L = g.half_width, xn = norm(x, g.dim);
    const double dr = L / 2000.0;
    double s = 0.0;
    for (double r = L; r < 50.0 * L; r += dr) {
      const double f = cert->bound_at(r) * std::pow(xn + r, std::max(power, 0)) * std::pow(r, g.dim - 1);
      s += f;
      if (r > 2.0 * L && f < 1e-300) break;
    }
    out.truncation_bound = sphere_area(g.dim) * s * dr;
  }
  return out;
}

IntegerCheck check_F_at_integers(const FFunction& F, int M_max, double delta) {
  if (M_max < 1) throw DomainError("M_max must be at least 1");
  IntegerCheck c;
  c.bound_constant = kIntegerBoundConstant;
  c.all_ok = true;
  for (int m = 1; m <= M_max; ++m) {
    IntegerRow row;
    row.m = m;
    for (std::size_t k = 0; k < F.terms(); ++k) {
      const cplx t = F.term_right(k, static_cast<double>(m)).value;
      row.F += t;
      row.scale += std::abs(t);
    }
    row.relative = row.scale == 0.0 ? 0.0 : std::abs(row.F) / row.scale;
    row.bound = kIntegerBoundConstant * delta;
    row.ok = row.relative <= row.bound;
    c.all_ok = c.all_ok && row.ok;
    c.max_relative = std::max(c.max_relative, row.relative);
    c.rows.push_back(row);
  }
  return c;
}

PilaReport pila_growth_diagnostics(const FFunction& F) {
  PilaReport rep;
  const double ninf = -std::numeric_limits<double>::infinity();
  auto logabs = [&](cplx z) {
    const double a = std::abs(F.right(z).value);
    return a == 0.0 ? ninf : std::log(a);
  };
  rep.imag_axis = rep.real_axis = rep.half_plane = ninf;
  const double C = std::sqrt(2.0 * kPi) * std::exp(1.0 / 6.0);
  for (int i = 0; i <= 4; ++i) {
    const double b = 20.0 + 2.5 * i;
    for (double sgn : {1.0, -1.0}) {
      rep.imag_axis = std::max(rep.imag_axis, logabs(cplx(0.0, sgn * b)) / (kPi * b));
      for (double a : F.scenario().alphas) {
        const double env = C * std::pow(2.0 * b, a + 0.5) * std::exp(-0.5 * kPi * b);
        const double g = std::abs(gamma_fn(cplx(1.0 + a, sgn * b)));
        rep.imag_envelope_ratio = std::max(rep.imag_envelope_ratio, g / env);
      }
    }
    rep.real_axis = std::max(rep.real_axis, logabs(cplx(b, 0.0)) / (2.0 * b * std::log(b)));
  }
  const double R = 30.0;
  for (int i = 0; i <= 12; ++i) {
    const double th = -0.5 * kPi + kPi * i / 12.0;
    rep.half_plane = std::max(rep.half_plane, logabs(std::polar(R, th)) / std::pow(R, 1.5));
  }
  rep.zero = std::isinf(rep.imag_axis) && std::isinf(rep.real_axis) && std::isinf(rep.half_plane);
  return rep;
}

FScenario enforce_constraint_fixture(const FScenario& raw, int M_max, double delta, const TimeQuadrature& quad) {
  if (M_max < 1) throw DomainError("M_max must be at least 1");
  raw.validate();
  const std::size_t N = raw.fields.size() - 1;
  const Field& vN = raw.fields[N];
  const GridSpec& g = vN.grid();
  const double aN = raw.alphas[N];
  const int n = g.dim;

  // Basis |v_N| (|y-x|^2 / rho^2)^r, supported where v_N is.
  double wsum = 0.0, r2sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::abs(vN[i]);
    if (w == 0.0) continue;
    const double r = distance(g.point(i), raw.x, n);
    wsum += w;
    r2sum += w * r * r;
  }
  if (wsum == 0.0) throw PreconditionError("last field is zero; nothing to correct");
  const double rho2 = r2sum / wsum;
  std::vector<Field> basis;
  for (int r = 0; r < M_max; ++r) {
    std::vector<cplx> b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double w = std::abs(vN[i]);
      if (w == 0.0) continue;
      const double d = distance(g.point(i), raw.x, n);
      b[i] = w * std::pow(d * d / rho2, r);
    }
    basis.emplace_back(g, std::move(b));
  }

  auto term = [&](const Field& f, double a, int m) {
    HeatTrace tr(f, raw.x, quad, raw.region.O);
    const cplx pref = std::exp(log_gamma(m + 1.0 + a) + log_term_prefactor(a));
    return pref * tr.mellin(m + a).value;
  };

  Eigen::MatrixXcd B(M_max, M_max);
  Eigen::VectorXcd others(M_max), own(M_max);
  std::vector<double> other_abs(M_max, 0.0);
  for (int m = 1; m <= M_max; ++m) {
    others(m - 1) = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const cplx t = term(raw.fields[k], raw.alphas[k], m);
      others(m - 1) += t;
      other_abs[m - 1] += std::abs(t);
    }
    own(m - 1) = term(vN, aN, m);
    for (int r = 0; r < M_max; ++r) B(m - 1, r) = term(basis[r], aN, m);
  }

  // Row-normalize, then pseudo-invert. The scale depends on the correction,
  // so iterate the target a few times.
  Eigen::VectorXd rs(M_max);
  for (int i = 0; i < M_max; ++i) rs(i) = std::max(other_abs[i] + std::abs(own(i)), 1e-300);
  Eigen::MatrixXcd Bn = rs.cwiseInverse().asDiagonal() * B;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Bn, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-14);
  Eigen::VectorXcd beta = Eigen::VectorXcd::Zero(M_max);
  for (int it = 0; it < 6; ++it) {
    Eigen::VectorXcd ownN = own + B * beta;
    Eigen::VectorXcd target(M_max);
    for (int i = 0; i < M_max; ++i) {
      const double scale = other_abs[i] + std::abs(ownN(i));
      target(i) = (delta * scale - others(i) - own(i)) / rs(i);
    }
    beta = svd.solve(target);
  }

  std::vector<cplx> out(vN.values());
  for (int r = 0; r < M_max; ++r)
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += beta(r) * basis[r][i];
  Field corrected(g, std::move(out));
  std::optional<DecayCertificate> cert;
  if (vN.decay() && vN.decay()->numerically_zero_tail) {
    cert = vN.decay();
    cert->C = corrected.max_abs();
  } else {
    DecayFit fit = fit_super_exp_decay(corrected);
    if (fit.success) cert = fit.certificate;
  }
  FScenario sc = raw;
  sc.fields[N] = corrected.with_decay(cert);
  return sc;
}

}  // namespace fraclab
