#include "fraclab/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fraclab/analytic.hpp"
#include "fraclab/decay.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

namespace {

std::optional<DecayCertificate> certificate_for(const Field& v, const Field& source) {
  if (source.decay() && source.decay()->numerically_zero_tail) {
    DecayCertificate c = *source.decay();
    c.C = v.max_abs();
    return c;
  }
  if (v.max_abs() == 0.0) return source.decay();
  DecayFit fit = fit_super_exp_decay(v);
  if (fit.success) return fit.certificate;
  return std::nullopt;
}

// Absolute moment h^n sum |v| r^power, the natural size of a moment.
double absolute_moment(const Field& v, const Point& x, int power) {
  const GridSpec& g = v.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (v[i] != 0.0) s += std::abs(v[i]) * std::pow(distance(g.point(i), x, g.dim), power);
  return s * g.cell_volume();
}

}  // namespace

SmoothReduction reduce_to_smooth(const std::vector<Field>& raw, const ExponentConfig& cfg, const RegionSpec& region,
                                 const Point& x, double eps, bool allow_override) {
  if (raw.empty() || raw.size() != cfg.size()) throw PreconditionError("need one field per exponent term");
  const GridSpec& g = raw.front().grid();
  const int n = g.dim;
  SmoothReduction out;
  out.hypothesis = validate_exponents(cfg, n);
  if (!out.hypothesis.ok && !allow_override)
    throw HypothesisError("exponent separation fails; pass the override to proceed");
  region.validate(g);
  out.eps = eps;
  out.eps0 = region.margin(g) - 2.0 * region.kappa;
  for (const auto& u : raw) {
    if (!u.decay()) throw PreconditionError("raw fields need decay certificates");
    if (max_abs_on(u, region.O) > 1e-10 * u.max_abs()) throw PreconditionError("raw field does not vanish on O");
  }

  FScenario& sc = out.scenario;
  sc.region = region.shrunk(eps);
  sc.x = x;
  sc.allow_override = allow_override;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const ExponentTerm& term = cfg.terms()[k];
    Field w = mollify(raw[k], eps, out.eps0) * term.b;
    const int p = term.floor();
    if (p > 0) {
      w = laplacian_power(w, p) * (p % 2 == 0 ? 1.0 : -1.0);
      std::vector<cplx> vals(w.values());
      for (std::size_t i = 0; i < g.size(); ++i)
        if (sc.region.in_O(g.point(i), n)) vals[i] = 0.0;
      w = Field(g, std::move(vals));
    }
    sc.fields.push_back(w.with_decay(certificate_for(w, raw[k])));
    sc.alphas.push_back(term.alpha());
  }
  sc.region.validate(g);
  sc.validate();
  return out;
}

std::vector<Point> default_omega_samples(const FScenario& sc) {
  const int n = sc.dim();
  const double arm = 0.4 * sc.region.kappa;
  std::vector<Point> cand{sc.x};
  auto shifted = [&](int axis, double d) {
    Point p = sc.x;
    p[axis] += d;
    return p;
  };
  if (n == 1) {
    for (double d : {-2 * arm, -arm, arm, 2 * arm}) cand.push_back(shifted(0, d));
  } else {
    for (int a = 0; a < 2; ++a)
      for (double d : {-arm, arm}) cand.push_back(shifted(a, d));
  }
  std::vector<Point> out;
  for (const auto& p : cand)
    if (sc.region.in_omega(p, n)) out.push_back(p);
  return out;
}

PipelineReport run_pipeline(const FScenario& sc, const PipelineOptions& opt) {
  sc.validate();
  PipelineReport r;
  r.kappa = sc.region.kappa;
  r.delta = opt.delta;
  r.moment_tol = opt.moment_tol;
  r.hypothesis_ok = sc.separation_holds();
  for (const auto& p : poles_of(sc, opt.moment_m_max))
    if (p.coincident) r.coincident_poles = true;
  for (const auto& v : sc.fields) r.truncation_bound = std::max(r.truncation_bound, v.truncation_bound());
  r.eps0 = sc.region.margin(sc.fields.front().grid()) - 2.0 * sc.region.kappa;

  // Step I
  FFunction F(sc, opt.quad);
  r.step1 = check_F_at_integers(F, opt.M_max, opt.delta);
  r.step1_ok = r.step1.all_ok;

  // Step II
  const auto samples = opt.omega_samples.empty() ? default_omega_samples(sc) : opt.omega_samples;
  r.step2_ok = true;
  r.step2_vanish = true;
  const int n = sc.dim();
  for (const auto& x : samples) {
    FScenario at = sc;
    at.x = x;
    FFunction Fx(at, opt.quad);
    for (std::size_t k = 0; k < sc.fields.size(); ++k)
      for (int m = 0; m <= opt.moment_m_max; ++m) {
        MomentRow row;
        row.k = static_cast<int>(k);
        row.x = x;
        row.m = m;
        const MomentPole pole = moment_pole(n, sc.alphas[k], m);
        row.z_pole = pole.z0;
        try {
          row.extracted = residue_moment(Fx, k, m).moment;
          row.direct = moment_direct(sc.fields[k], x, pole.power).value;
          const double s = std::max(std::abs(row.extracted), std::abs(row.direct));
          row.rel_err = s == 0.0 ? 0.0 : std::abs(row.extracted - row.direct) / s;
          const double am = absolute_moment(sc.fields[k], x, pole.power);
          row.relative_size = am == 0.0 ? 0.0 : std::abs(row.extracted) / am;
          row.agrees = row.rel_err <= opt.moment_tol;
          row.vanishes = row.relative_size <= opt.moment_tol;
        } catch (const Error& e) {
          row.error = std::string("step II: ") + e.what();
        }
        r.step2_ok = r.step2_ok && row.agrees && r.hypothesis_ok;
        r.step2_vanish = r.step2_vanish && row.vanishes;
        r.step2.push_back(row);
      }
  }

  // Step III
  double scale = 0.0;
  for (const auto& v : sc.fields) scale = std::max(scale, v.max_abs());
  if (scale == 0.0) scale = 1.0;
  r.step3_ok = true;
  for (const auto& v : sc.fields) {
    r.step3.push_back(support_decision(v, sc.region, samples, opt.delta, scale));
    r.step3_ok = r.step3_ok && r.step3.back().zero;
  }
  const bool upstream = r.step1_ok && r.step2_ok && r.step2_vanish;
  for (const auto& v : r.step3) r.zero.push_back(upstream && v.zero);
  r.all_ok = upstream && r.step3_ok;
  return r;
}

std::string render_summary(const PipelineReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "hypothesis (H): " << (r.hypothesis_ok ? "holds" : "VIOLATED (override)")
     << (r.coincident_poles ? ", coincident poles: disentanglement not claimed" : "") << '\n';
  os << "margins: kappa=" << r.kappa << " eps0=" << r.eps0 << " delta=" << r.delta
     << " truncation=" << r.truncation_bound << '\n';
  os << "step I: max |F(m)|/scale = " << r.step1.max_relative << " (bound " << r.step1.bound_constant * r.delta
     << ") " << (r.step1_ok ? "PASS" : "FAIL") << '\n';
  int bad = 0, errors = 0;
  double worst = 0.0;
  for (const auto& row : r.step2) {
    if (!row.agrees) ++bad;
    if (!row.error.empty()) ++errors;
    worst = std::max(worst, row.rel_err);
  }
  os << "step II: " << r.step2.size() << " moments, max residue/direct rel err " << worst << " (tol "
     << r.moment_tol << "), disagreements " << bad << ", errors " << errors << ", moments vanish: "
     << (r.step2_vanish ? "yes" : "no") << " " << (r.step2_ok && r.step2_vanish ? "PASS" : "FAIL") << '\n';
  for (std::size_t k = 0; k < r.step3.size(); ++k) {
    const auto& v = r.step3[k];
    os << "step III term " << k + 1 << ": " << (v.zero ? "ZERO" : "NONZERO") << " max|SM|=" << v.max_abs
       << " tol=" << v.tolerance;
    if (!v.zero)
      os << " witness x=(" << v.witness_x[0] << ", " << v.witness_x[1] << ", " << v.witness_x[2]
         << ") t=" << v.witness_t;
    os << '\n';
  }
  for (std::size_t k = 0; k < r.zero.size(); ++k)
    os << "verdict term " << k + 1 << ": " << (r.zero[k] ? "ZERO" : "NONZERO") << '\n';
  os << "overall: " << (r.all_ok ? "PASS" : "FAIL") << '\n';
  return os.str();
}

HNecessityReport demonstrate_H_necessity(int n) {
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  HNecessityReport rep;
  rep.dim = n;
  const GridSpec g = n == 3 ? GridSpec::make(3, 8.0, 64) : GridSpec::make(n, 12.0, n == 2 ? 256 : 1024);
  std::vector<double> c(n, 0.0);
  Field v1 = sample_analytic(g, AnalyticSpec::shell(c, 3.5, 0.3));
  Field v2 = sample_analytic(g, AnalyticSpec::shell(c, 5.0, 0.3));
  RegionSpec region;
  region.O = {Shape::ball({0, 0, 0}, 1.5)};
  region.omega = {Shape::ball({0, 0, 0}, 0.3)};
  region.kappa = 0.25;

  if (n % 2 == 0) {
    rep.violating_alphas = {0.3, 0.3};
    rep.valid_alphas = {0.3, 0.75};
  } else {
    rep.violating_alphas = {0.2, 0.7};
    rep.valid_alphas = {0.2, 0.6};
  }

  auto scenario = [&](std::vector<Field> f, std::vector<double> a) {
    FScenario sc;
    sc.fields = std::move(f);
    sc.alphas = std::move(a);
    sc.region = region;
    sc.allow_override = true;
    return sc;
  };
  auto mixing = [&](const std::vector<double>& a) {
    FFunction both(scenario({v1, v2}, a));
    double worst = 0.0;
    const std::vector<Field> alone = {v1, v2};
    for (std::size_t j = 0; j < 2; ++j) {
      FFunction iso(scenario({alone[j]}, {a[j]}));
      const cplx mixed = residue_moment(both, j, rep.m).moment;
      const cplx clean = residue_moment(iso, 0, rep.m).moment;
      worst = std::max(worst, std::abs(mixed - clean) / std::abs(clean));
    }
    return worst;
  };
  rep.mixing_violating = mixing(rep.violating_alphas);
  rep.mixing_valid = mixing(rep.valid_alphas);
  {
    FFunction iso(scenario({v1}, {rep.valid_alphas[0]}));
    const cplx a = residue_moment(iso, 0, rep.m).moment;
    const cplx b = moment_direct(v1, {0, 0, 0}, moment_pole(n, rep.valid_alphas[0], rep.m).power).value;
    rep.mixing_single = std::abs(a - b) / std::abs(b);
  }
  rep.mechanism_shown = rep.mixing_violating > 10.0 * rep.tolerance && rep.mixing_valid <= rep.tolerance;
  return rep;
}

}  // namespace fraclab
