#include "fraclab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>

#include "fraclab/calderon.hpp"
#include "fraclab/config.hpp"
#include "fraclab/entangle.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/heat.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/snapshot.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/spherical.hpp"

namespace fraclab {

std::complex<double> parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw DomainError("empty complex number");
  auto to_double = [&](const std::string& part) {
    if (part == "" || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(part, &used);
    } catch (const std::exception&) {
      throw DomainError("malformed complex number '" + text + "'");
    }
    if (used != part.size()) throw DomainError("malformed complex number '" + text + "'");
    return x;
  };
  if (s.back() != 'i') return {to_double(s), 0.0};
  s.pop_back();
  // Split at the last sign that is neither leading nor part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  if (split == std::string::npos) return {0.0, to_double(s)};
  return {to_double(s.substr(0, split)), to_double(s.substr(split))};
}

namespace {

struct Context {
  ScenarioConfig cfg;
  std::filesystem::path out_dir;
  std::optional<double> tol_override;
  bool verbose = false;
  std::ostream& out;
  std::vector<std::string> failures;

  double tol(double fallback) const { return tol_override.value_or(fallback); }
  std::string path(const std::string& name) const { return (out_dir / name).string(); }
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}
std::string fmt(cplx z) { return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i"; }

double rel(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::vector<Point> probe_nodes(const GridSpec& g) {
  std::vector<Point> pts{g.point(g.center_index())};
  const int step = g.points_per_axis / 16;
  for (int d = 0; d < std::min(g.dim, 2); ++d)
    for (int sgn : {-1, 1}) {
      auto idx = g.index(g.center_index());
      idx[d] += sgn * step;
      pts.push_back(g.point(g.flat(idx)));
    }
  return pts;
}

SmoothReduction reduce(const Context& c) {
  const GridSpec g = grid_of(c.cfg);
  return reduce_to_smooth(fields_of(c.cfg, g), exponents_of(c.cfg), region_of(c.cfg),
                          point_of(c.cfg.reals("fields", "x")), c.cfg.real("pipeline", "eps"),
                          c.cfg.boolean("pipeline", "allow_override"));
}

// ---------------------------------------------------------------------------

void cmd_fraclap(Context& c) {
  const GridSpec g = grid_of(c.cfg);
  const auto fields = fields_of(c.cfg, g);
  if (fields.empty()) throw PreconditionError("[fields].u is empty");
  const Field& u = fields.front();
  const double tol = c.tol(c.cfg.real("pipeline", "tol"));
  const TimeQuadrature quad = quadrature_of(c.cfg);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (double s : c.cfg.reals("exponents", "s")) {
    const Field F = frac_lap_fourier(u, s);
    const FourierEvaluator ev(F);
    const double scale = F.max_abs();
    for (const auto& x : probe_nodes(g)) {
      const cplx a = ev(x), b = frac_lap_heat(u, s, x, quad).value;
      const double e = scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
      worst = std::max(worst, e);
      rows.push_back({s, x[0], x[1], x[2], a.real(), a.imag(), b.real(), b.imag(), e});
    }
  }
  write_csv(c.path("fraclap.csv"),
            {"s", "x0", "x1", "x2", "fourier_re", "fourier_im", "heat_re", "heat_im", "rel_err"}, rows);
  c.out << "fraclap: " << rows.size() << " samples, max relative difference " << fmt(worst) << " (tol "
        << fmt(tol) << ")\n";
  c.check(worst <= tol, "fraclap: heat and Fourier representations differ by " + fmt(worst));
}

void cmd_heat(Context& c) {
  const GridSpec g = grid_of(c.cfg);
  const auto fields = fields_of(c.cfg, g);
  if (fields.empty()) throw PreconditionError("[fields].u is empty");
  const Field& u = fields.front();
  const double t = c.cfg.real("pipeline", "t");
  const double tol = c.tol(1e-10);
  auto rel_sup = [](const Field& a, const Field& b) {
    double m = 0.0, s = std::max(a.max_abs(), b.max_abs());
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return s == 0.0 ? 0.0 : m / s;
  };
  std::vector<std::vector<double>> rows;
  const Field full = heat_evolve(u, t);
  const double semi = rel_sup(heat_evolve(heat_evolve(u, 0.5 * t), 0.5 * t), full);
  rows.push_back({0, t, 0.0, semi});
  c.check(semi <= tol, "heat: semigroup residual " + fmt(semi));
  const auto s = c.cfg.reals("exponents", "s");
  double worst = 0.0;
  for (double a : s)
    for (double b : s) {
      const double e = rel_sup(frac_lap_fourier(frac_lap_fourier(u, a), b), frac_lap_fourier(u, a + b));
      worst = std::max(worst, e);
      rows.push_back({1, a, b, e});
    }
  c.check(worst <= tol, "heat: composition residual " + fmt(worst));
  write_csv(c.path("heat_checks.csv"), {"check", "p1", "p2", "rel_err"}, rows);
  write_snapshot(c.path("heat.frl"), full);
  c.out << "heat: semigroup residual " << fmt(semi) << ", composition residual " << fmt(worst) << " (tol "
        << fmt(tol) << ")\n";
}

void cmd_fz(Context& c, const std::string& ztext) {
  const cplx z = parse_complex(ztext);
  const auto red = reduce(c);
  const FFunction F(red.scenario, quadrature_of(c.cfg));
  std::optional<QuadValue> right;
  std::optional<cplx> mero;
  if (z.real() >= 0.0) right = F.right(z);
  try {
    mero = F.mero(z);
  } catch (const PoleError& e) {
    c.out << "fz: " << e.what() << '\n';
  }
  const double nan = std::nan("");
  write_csv(c.path("fz.csv"), {"z_re", "z_im", "right_re", "right_im", "mero_re", "mero_im"},
            {{z.real(), z.imag(), right ? right->value.real() : nan, right ? right->value.imag() : nan,
              mero ? mero->real() : nan, mero ? mero->imag() : nan}});
  c.out << "F(" << fmt(z) << ")";
  if (right) c.out << "  right half-plane: " << std::setprecision(17) << right->value << std::setprecision(6)
                   << " (quadrature error " << fmt(right->error_estimate) << ")";
  if (mero) c.out << "  continuation: " << std::setprecision(17) << *mero << std::setprecision(6);
  c.out << '\n';
  if (right && mero) {
    const double e = rel(right->value, *mero);
    const double tol = c.tol(1e-4);
    c.out << "relative difference " << fmt(e) << " (tol " << fmt(tol) << ")\n";
    c.check(e <= tol, "fz: representations differ by " + fmt(e));
  }
}

void cmd_residues(Context& c) {
  const auto red = reduce(c);
  const FScenario& sc = red.scenario;
  const FFunction F(sc, quadrature_of(c.cfg));
  const int mmax = c.cfg.integer("pipeline", "moment_m_max");
  const double tol = c.tol(c.cfg.real("pipeline", "moment_tol"));
  std::vector<std::vector<double>> prow;
  for (const auto& p : poles_of(sc, mmax))
    prow.push_back({p.location.real(), p.location.imag(), double(p.order), double(p.term_index), double(p.m),
                    p.coincident ? 1.0 : 0.0});
  write_csv(c.path("poles.csv"), {"re", "im", "order", "term", "m", "coincident"}, prow);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < sc.fields.size(); ++k)
    for (int m = 0; m <= mmax; ++m) {
      const MomentPole pole = moment_pole(sc.dim(), sc.alphas[k], m);
      const cplx direct = moment_direct(sc.fields[k], sc.x, pole.power).value;
      cplx got{};
      try {
        got = residue_moment(F, k, m).moment;
      } catch (const ConvergenceError& e) {
        c.check(false, "residues: term " + std::to_string(k + 1) + " m=" + std::to_string(m) + ": " + e.what());
        got = cplx(std::nan(""), std::nan(""));
      }
      const double e = rel(got, direct);
      if (std::isfinite(e)) worst = std::max(worst, e);
      rows.push_back({double(k), double(m), pole.z0.real(), pole.z0.imag(), double(pole.power), got.real(),
                      got.imag(), direct.real(), direct.imag(), e});
      if (c.verbose)
        c.out << "  term " << k + 1 << " m=" << m << " pole " << fmt(pole.z0) << " residue moment " << fmt(got)
              << " direct " << fmt(direct) << '\n';
    }
  write_csv(c.path("moments.csv"),
            {"term", "m", "z_re", "z_im", "power", "residue_re", "residue_im", "direct_re", "direct_im", "rel_err"},
            rows);
  c.out << "residues: " << prow.size() << " poles, " << rows.size() << " moments, max residue/direct error "
        << fmt(worst) << " (tol " << fmt(tol) << ")\n";
  c.check(worst <= tol, "residues: moment mismatch " + fmt(worst));
}

void cmd_spherical(Context& c) {
  const GridSpec g = grid_of(c.cfg);
  const auto fields = fields_of(c.cfg, g);
  const RegionSpec region = region_of(c.cfg);
  const Point x = point_of(c.cfg.reals("fields", "x"));
  FScenario probe;
  probe.fields = fields;
  probe.region = region;
  probe.x = x;
  const auto samples = default_omega_samples(probe);
  const double delta = c.tol(c.cfg.real("pipeline", "delta"));
  double scale = 0.0;
  for (const auto& v : fields) scale = std::max(scale, v.max_abs());
  if (scale == 0.0) scale = 1.0;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const RadialProfile f = build_profile(fields[k], x, region);
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < f.h.size(); ++j) rows.push_back({f.t(j), f.h[j].real(), f.h[j].imag()});
    write_csv(c.path("profile_" + std::to_string(k + 1) + ".csv"), {"t", "re", "im"}, rows);
    const SupportVerdict v = support_decision(fields[k], region, samples, delta, scale);
    c.out << "field " << k + 1 << ": " << (v.zero ? "ZERO" : "NONZERO") << " max|SM| " << fmt(v.max_abs)
          << " tol " << fmt(v.tolerance);
    if (!v.zero) c.out << " witness t=" << fmt(v.witness_t);
    c.out << '\n';
  }
}

void cmd_entangle(Context& c) {
  const auto red = reduce(c);
  PipelineOptions opt;
  opt.M_max = c.cfg.integer("pipeline", "M_max");
  opt.moment_m_max = c.cfg.integer("pipeline", "moment_m_max");
  opt.delta = c.cfg.real("pipeline", "delta");
  opt.moment_tol = c.tol(c.cfg.real("pipeline", "moment_tol"));
  opt.quad = quadrature_of(c.cfg);
  const PipelineReport r = run_pipeline(red.scenario, opt);
  std::vector<std::vector<double>> s1, s2, s3;
  for (const auto& row : r.step1.rows)
    s1.push_back({double(row.m), row.F.real(), row.F.imag(), row.scale, row.relative, row.bound, row.ok ? 1.0 : 0.0});
  for (const auto& row : r.step2)
    s2.push_back({double(row.k), row.x[0], row.x[1], row.x[2], double(row.m), row.z_pole.real(), row.extracted.real(),
                  row.extracted.imag(), row.direct.real(), row.direct.imag(), row.rel_err, row.relative_size});
  for (std::size_t k = 0; k < r.step3.size(); ++k) {
    const auto& v = r.step3[k];
    s3.push_back({double(k), v.zero ? 1.0 : 0.0, v.max_abs, v.tolerance, v.witness_x[0], v.witness_x[1],
                  v.witness_x[2], v.witness_t});
  }
  write_csv(c.path("step1.csv"), {"m", "F_re", "F_im", "scale", "relative", "bound", "ok"}, s1);
  write_csv(c.path("step2.csv"),
            {"term", "x0", "x1", "x2", "m", "z_pole", "residue_re", "residue_im", "direct_re", "direct_im",
             "rel_err", "relative_size"},
            s2);
  write_csv(c.path("step3.csv"), {"term", "zero", "max_abs", "tolerance", "wx0", "wx1", "wx2", "wt"}, s3);
  c.out << render_summary(r);
  c.check(r.step1_ok, "step I: integer residuals above bound");
  c.check(r.step2_ok, "step II: residue and quadrature moments disagree");
  c.check(r.step2_vanish, "step II: moments do not vanish");
  c.check(r.step3_ok, "step III: spherical means do not vanish");
}

void cmd_ip2_forward(Context& c) {
  const ExteriorProblem p = ip2_problem_of(c.cfg);
  const IP2Options o = ip2_options_of(c.cfg);
  const ExteriorSolver s(p);
  const DNMatrix D = ip2_measure(s, o);
  write_dn_csv(c.path("dn.csv"), D.entries);
  double worst = 0.0;
  const std::size_t pairs = std::min<std::size_t>({4, D.sources.size(), D.receivers.size()});
  for (std::size_t i = 0; i < pairs; ++i)
    worst = std::max(worst, rel(D.entries(i, i), s.dn_pair(D.receivers[i], D.sources[i])));
  const double tol = c.tol(1e-9);
  c.out << "ip2-forward: " << D.entries.rows() << " x " << D.entries.cols() << " DN matrix, " << s.interior().size()
        << " interior nodes, sigma_min/||A|| " << fmt(s.sigma_min() / s.op_norm()) << ", symmetry residual "
        << fmt(worst) << " (tol " << fmt(tol) << ")\n";
  c.check(worst <= tol, "ip2-forward: DN symmetry residual " + fmt(worst));
}

void cmd_ip2_reconstruct(Context& c) {
  const ExteriorProblem p = ip2_problem_of(c.cfg);
  const IP2Options o = ip2_options_of(c.cfg);
  const ExteriorSolver ref(p.with_q(Field()));
  DNMatrix data;
  const std::string src = c.cfg.text("ip2", "data");
  if (src.empty()) {
    data = ip2_measure(ExteriorSolver(p), o);
  } else {
    data.sources = bump_dictionary(p.grid, p.W1, o.n_sources);
    data.receivers = bump_dictionary(p.grid, p.W2, o.n_receivers);
    data.entries = read_dn_csv(src);
  }
  const Reconstruction rec = reconstruct_q(data, ref, o);
  const auto& nodes = ref.interior();
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const Point x = p.grid.point(nodes[n]);
    rows.push_back({x[0], x[1], x[2], rec.q[nodes[n]].real(), rec.q[nodes[n]].imag(), p.q[nodes[n]].real(),
                    rec.masked[n] ? 1.0 : 0.0});
  }
  write_csv(c.path("q_rec.csv"), {"x0", "x1", "x2", "q_re", "q_im", "q_true", "masked"}, rows);
  write_snapshot(c.path("q_rec.frl"), rec.q);
  const double err = reconstruction_error(rec, p.q, nodes);
  const double tol = c.tol(c.cfg.real("ip2", "tol"));
  c.out << "ip2-reconstruct: rank " << rec.rank << ", Runge error " << fmt(rec.runge_error) << ", masked "
        << rec.masked_count << " of " << nodes.size() << " cells, relative L2 error " << fmt(err) << " (tol "
        << fmt(tol) << ")\n";
  c.check(err <= tol, "ip2-reconstruct: relative error " + fmt(err));
}

void cmd_symbol(Context& c) {
  const GridSpec g = grid_of(c.cfg);
  const int n = g.dim;
  const auto a = c.cfg.reals("symbol", "A");
  if (a.size() != static_cast<std::size_t>(n * n)) throw PreconditionError("[symbol].A needs dim^2 entries");
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) A(j, k) = a[j * n + k];
  const MatrixField field = [A](const Point&) { return A; };
  const Point x0 = point_of(c.cfg.reals("symbol", "x0"));
  const Point xi = point_of(c.cfg.reals("symbol", "xi"));
  const auto ladder = c.cfg.reals("symbol", "ladder");
  const double delta = c.cfg.real("symbol", "delta");
  const double tol = c.tol(c.cfg.real("symbol", "tol"));
  const SymbolEstimate e = aniso_symbol_extract(field, g, x0, xi, ladder, delta);
  double exact = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) exact += A(j, k) * xi[j] * xi[k];
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < e.values.size(); ++i)
    rows.push_back({e.lambdas[i], e.values[i].real(), e.values[i].imag()});
  rows.push_back({0.0, e.extrapolated.real(), e.extrapolated.imag()});
  write_csv(c.path("symbol.csv"), {"lambda", "re", "im"}, rows);
  const double err = exact == 0.0 ? std::abs(e.extrapolated) : std::abs(e.extrapolated - exact) / std::abs(exact);
  c.out << "symbol: extrapolated " << fmt(e.extrapolated) << ", exact " << fmt(exact) << ", error " << fmt(err)
        << " (tol " << fmt(tol) << "), max admissible lambda " << fmt(e.max_admissible_lambda) << '\n';
  c.check(err <= tol, "symbol: quadratic form error " + fmt(err));
  if (c.cfg.boolean("symbol", "polarize")) {
    const Eigen::MatrixXd S = polarize_symbol(field, g, x0, ladder, delta);
    const double amax = A.cwiseAbs().maxCoeff();
    std::vector<std::vector<double>> mrows;
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double d = amax == 0.0 ? std::abs(S(j, k)) : std::abs(S(j, k) - A(j, k)) / amax;
        worst = std::max(worst, d);
        mrows.push_back({double(j), double(k), S(j, k), A(j, k)});
      }
    write_csv(c.path("symbol_matrix.csv"), {"j", "k", "estimate", "exact"}, mrows);
    c.out << "symbol: polarized matrix max error " << fmt(worst) << " relative to max |A|\n";
    c.check(worst <= tol, "symbol: polarization error " + fmt(worst));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fraclab: fractional Laplacian entanglement and Calderon toolkit"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = ".", z_text = "1";
  double tol_override = std::nan("");
  int threads = 0;
  bool verbose = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fraclap", "compare heat-semigroup and Fourier fractional Laplacians"},
      {"heat", "semigroup and composition laws"},
      {"fz", "evaluate F(z) in both representations"},
      {"residues", "pole table and residue moments"},
      {"spherical", "spherical-mean profiles and support decision"},
      {"entangle", "three-step entanglement pipeline"},
      {"ip2-forward", "DN matrix from the forward solver"},
      {"ip2-reconstruct", "blind reconstruction of the potential"},
      {"symbol", "anisotropic symbol extraction"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "scenario file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--tol-override", tol_override, "replace the primary tolerance");
    sub->add_option("--threads", threads, "worker threads (FRACLAB_THREADS otherwise)");
    sub->add_flag("--verbose", verbose, "more output");
    if (name == "fz") sub->add_option("--z", z_text, "evaluation point, e.g. 1+0i");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (threads > 0) set_thread_count(threads);
    Context c{ScenarioConfig::load(config_path), out_dir, std::nullopt, verbose, out, {}};
    if (!std::isnan(tol_override)) c.tol_override = tol_override;
    std::filesystem::create_directories(c.out_dir);
    if (verbose) out << c.cfg.serialize() << '\n';
    static const std::map<std::string, std::function<void(Context&)>> table = {
        {"fraclap", cmd_fraclap},
        {"heat", cmd_heat},
        {"residues", cmd_residues},
        {"spherical", cmd_spherical},
        {"entangle", cmd_entangle},
        {"ip2-forward", cmd_ip2_forward},
        {"ip2-reconstruct", cmd_ip2_reconstruct},
        {"symbol", cmd_symbol},
    };
    if (cmd == "fz") cmd_fz(c, z_text);
    else table.at(cmd)(c);
    if (!c.failures.empty()) {
      out << "FAILED checks:\n";
      for (const auto& f : c.failures) out << "  " << f << '\n';
      return kExitToleranceFailure;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << cmd << ": " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fraclab
