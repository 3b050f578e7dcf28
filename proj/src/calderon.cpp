#include "fraclab/calderon.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fraclab/errors.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

namespace {

const double kPi = std::numbers::pi;

std::vector<bool> membership(const GridSpec& g, const std::vector<Shape>& set) {
  std::vector<bool> in(g.size(), false);
  for (std::size_t i = 0; i < g.size(); ++i) in[i] = in_union(set, g.point(i), g.dim);
  return in;
}

double halton(std::size_t k, int base) {
  double r = 0.0, f = 1.0 / base;
  for (std::size_t i = k; i > 0; i /= base, f /= base) r += f * static_cast<double>(i % base);
  return r;
}

// Tikhonov solution of min ||M c - b||^2 + lambda ||c||^2 via the SVD.
struct Tikhonov {
  Eigen::VectorXcd c;
  double condition = 0.0;
};

Tikhonov tikhonov(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b, double lambda) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXcd ub = svd.matrixU().adjoint() * b;
  const double smax = s.size() ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double d = s(i) * s(i) + lambda;
    ub(i) = (lambda == 0.0 && s(i) <= 1e-15 * smax) || d == 0.0 ? cplx(0.0) : ub(i) * (s(i) / d);
  }
  Tikhonov t;
  t.c = svd.matrixV() * ub;
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  const double den = smin * smin + lambda;
  t.condition = den > 0.0 ? (smax * smax + lambda) / den : INFINITY;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::size_t> ExteriorProblem::interior_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (in_union(Omega, grid.point(i), grid.dim)) out.push_back(i);
  return out;
}

void ExteriorProblem::validate() const {
  if (cfg.size() == 0) throw PreconditionError("no exponent terms");
  for (const auto& t : cfg.terms())
    if (!(t.b.real() > 0.0) || t.b.imag() != 0.0)
      throw DomainError("weights must be real and positive for coercivity");
  const auto in_omega = membership(grid, Omega);
  if (std::none_of(in_omega.begin(), in_omega.end(), [](bool b) { return b; }))
    throw PreconditionError("Omega contains no grid node");
  for (const auto* W : {&W1, &W2}) {
    const auto in_w = membership(grid, *W);
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      any = any || in_w[i];
      if (in_w[i] && in_omega[i]) throw PreconditionError("exterior set meets Omega");
    }
    if (!any) throw PreconditionError("exterior set contains no grid node");
  }
  if (q.size() != 0) {
    if (!(q.grid() == grid)) throw PreconditionError("potential lives on another grid");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (in_omega[i] && !std::isfinite(std::abs(q[i]))) throw PreconditionError("potential is not bounded");
  }
}

ExteriorProblem ExteriorProblem::with_q(Field q2) const {
  ExteriorProblem p = *this;
  p.q = std::move(q2);
  return p;
}

// ---------------------------------------------------------------------------

struct ExteriorSolver::Dense {
  Eigen::MatrixXcd A;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
};

ExteriorSolver::~ExteriorSolver() = default;
ExteriorSolver::ExteriorSolver(ExteriorSolver&&) noexcept = default;

ExteriorSolver::ExteriorSolver(ExteriorProblem prob) : prob_(std::move(prob)) {
  prob_.validate();
  const GridSpec& g = prob_.grid;
  nodes_ = prob_.interior_nodes();
  const std::size_t N = nodes_.size();
  q_nodes_.assign(N, 0.0);
  if (prob_.q.size() != 0)
    for (std::size_t i = 0; i < N; ++i) q_nodes_[i] = prob_.q[nodes_[i]];

  if (N <= kDenseLimit) {
    // Impulse response at the centre node gives the convolution kernel.
    const std::size_t c = g.center_index();
    std::vector<cplx> e(g.size(), 0.0);
    e[c] = 1.0;
    const Field K = apply_L(Field(g, std::move(e)));
    const auto ci = g.center_index();
    const auto cidx = g.index(ci);
    const int M = g.points_per_axis;
    std::vector<std::array<int, 3>> idx(N);
    for (std::size_t i = 0; i < N; ++i) idx[i] = g.index(nodes_[i]);
    dense_ = std::make_unique<Dense>();
    dense_->A.resize(N, N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        std::array<int, 3> off{0, 0, 0};
        for (int d = 0; d < g.dim; ++d) off[d] = ((idx[i][d] - idx[j][d] + cidx[d]) % M + M) % M;
        dense_->A(i, j) = K[g.flat(off)];
      }
    for (std::size_t i = 0; i < N; ++i) dense_->A(i, i) += q_nodes_[i];
    dense_->lu.compute(dense_->A);
  } else {
    for (auto qv : q_nodes_)
      if (qv.imag() != 0.0 || qv.real() < 0.0)
        throw PreconditionError("iterative path needs a real nonnegative potential");
  }

  // Power iterations for the extreme singular values.
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(N), y(N);
  for (std::size_t i = 0; i < N; ++i) x(i) = cplx(nd(rng), nd(rng));
  x.normalize();
  y = x;
  double big = 0.0, inv = 0.0;
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXcd ax = apply_A(x);
    Eigen::VectorXcd aax = dense_ ? Eigen::VectorXcd(dense_->A.adjoint() * ax) : apply_A(ax);
    big = std::sqrt(aax.norm());
    x = aax / aax.norm();
  }
  const int inv_iters = dense_ ? 40 : 8;
  for (int it = 0; it < inv_iters; ++it) {
    Eigen::VectorXcd z = dense_ ? Eigen::VectorXcd(dense_->lu.adjoint().solve(y)) : solve_interior(y);
    Eigen::VectorXcd w = dense_ ? Eigen::VectorXcd(dense_->lu.solve(z)) : solve_interior(z);
    inv = std::sqrt(w.norm());
    y = w / w.norm();
  }
  op_norm_ = big;
  sigma_min_ = inv > 0.0 ? 1.0 / inv : 0.0;
  if (!(sigma_min_ >= kEigenvalueThreshold * op_norm_)) {
    std::ostringstream os;
    os << "0 is numerically a Dirichlet eigenvalue: sigma_min = " << sigma_min_ << ", ||A|| = " << op_norm_;
    throw EigenvalueConditionError(os.str());
  }
}

bool ExteriorSolver::dense() const { return static_cast<bool>(dense_); }

const Eigen::MatrixXcd& ExteriorSolver::interior_matrix() const {
  if (!dense_) throw PreconditionError("interior matrix is only assembled on the dense path");
  return dense_->A;
}

Field ExteriorSolver::apply_L(const Field& u) const {
  const auto& terms = prob_.cfg.terms();
  return radial_multiplier(u, [&](double xi2) {
    if (xi2 == 0.0) return cplx(0.0);
    double s = 0.0;
    for (const auto& t : terms) s += t.b.real() * std::pow(xi2, t.s);
    return cplx(s);
  });
}

Eigen::VectorXcd ExteriorSolver::restrict(const Field& u) const {
  Eigen::VectorXcd v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) v(i) = u[nodes_[i]];
  return v;
}

Field ExteriorSolver::extend(const Eigen::VectorXcd& v) const {
  std::vector<cplx> vals(prob_.grid.size(), 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) vals[nodes_[i]] = v(i);
  return Field(prob_.grid, std::move(vals));
}

Eigen::VectorXcd ExteriorSolver::apply_A(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = restrict(apply_L(extend(v)));
  for (std::size_t i = 0; i < nodes_.size(); ++i) out(i) += q_nodes_[i] * v(i);
  return out;
}

Eigen::VectorXcd ExteriorSolver::solve_interior(const Eigen::VectorXcd& rhs) const {
  if (dense_) return dense_->lu.solve(rhs);
  // Conjugate gradients on the Hermitian positive definite interior operator.
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(rhs.size()), r = rhs, p = r;
  const double target = 1e-2 * kSolverTolerance * rhs.norm();
  double rr = r.squaredNorm();
  for (int it = 0; it < 20 * static_cast<int>(rhs.size()) && std::sqrt(rr) > target; ++it) {
    Eigen::VectorXcd ap = apply_A(p);
    const cplx alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return x;
}

cplx ExteriorSolver::form(const Field& v, const Field& w) const {
  const GridSpec& g = prob_.grid;
  cplx total = 0.0;
  for (const auto& t : prob_.cfg.terms()) {
    auto half = [&](double xi2) { return cplx(xi2 == 0.0 ? 0.0 : std::pow(xi2, 0.5 * t.s)); };
    const Field a = radial_multiplier(v, half), b = radial_multiplier(w, half);
    cplx s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += a[i] * std::conj(b[i]);
    total += t.b.real() * s;
  }
  cplx qs = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) qs += q_nodes_[i] * v[nodes_[i]] * std::conj(w[nodes_[i]]);
  return (total + qs) * g.cell_volume();
}

ExteriorSolution ExteriorSolver::solve(const Field& f) const {
  if (!(f.grid() == prob_.grid)) throw PreconditionError("source lives on another grid");
  const double fmax = f.max_abs();
  for (auto i : nodes_)
    if (std::abs(f[i]) > 1e-14 * fmax) throw PreconditionError("source does not vanish on Omega");
  const Eigen::VectorXcd rhs = -restrict(apply_L(f));
  ExteriorSolution out;
  if (rhs.norm() == 0.0) {
    out.u = f;
    return out;
  }
  const Eigen::VectorXcd v = solve_interior(rhs);
  out.residual = (apply_A(v) - rhs).norm() / rhs.norm();
  if (out.residual > kSolverTolerance) {
    std::ostringstream os;
    os << "interior residual " << out.residual << " above " << kSolverTolerance;
    throw ConvergenceError(os.str());
  }
  std::vector<cplx> vals(f.values());
  for (std::size_t i = 0; i < nodes_.size(); ++i) vals[nodes_[i]] = v(i);
  out.u = Field(prob_.grid, std::move(vals));
  return out;
}

Field ExteriorSolver::dn_apply(const Field& f) const {
  const GridSpec& g = prob_.grid;
  const Field Lu = apply_L(solve(f).u);
  const auto in_w2 = membership(g, prob_.W2);
  std::vector<cplx> vals(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (in_w2[i]) vals[i] = Lu[i];  // q vanishes off Omega
  return Field(g, std::move(vals));
}

cplx ExteriorSolver::dn_pair(const Field& f, const Field& g) const {
  const Field Lu = apply_L(solve(f).u);
  const GridSpec& gr = prob_.grid;
  std::vector<bool> inside(gr.size(), false);
  for (auto i : nodes_) inside[i] = true;
  cplx s = 0.0;
  for (std::size_t i = 0; i < gr.size(); ++i)
    if (!inside[i]) s += Lu[i] * g[i];
  return s * gr.cell_volume();
}

// ---------------------------------------------------------------------------

DNMatrix dn_matrix(const ExteriorSolver& s, const std::vector<Field>& sources, const std::vector<Field>& receivers) {
  DNMatrix D;
  D.sources = sources;
  D.receivers = receivers;
  D.entries.resize(sources.size(), receivers.size());
  const GridSpec& g = s.problem().grid;
  std::vector<bool> inside(g.size(), false);
  for (auto i : s.interior()) inside[i] = true;
  parallel_for(sources.size(), [&](std::size_t i) {
    const Field Lu = s.apply_L(s.solve(sources[i]).u);
    for (std::size_t j = 0; j < receivers.size(); ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (!inside[k]) acc += Lu[k] * receivers[j][k];
      D.entries(i, j) = acc * g.cell_volume();
    }
  });
  return D;
}

IdentityCheck integral_identity_check(const ExteriorSolver& s1, const ExteriorSolver& s2, const Field& f1,
                                      const Field& f2) {
  const auto& p1 = s1.problem();
  const auto& p2 = s2.problem();
  if (!(p1.grid == p2.grid) || s1.interior() != s2.interior())
    throw PreconditionError("problems must share the geometry");
  IdentityCheck c;
  c.lhs = s1.dn_pair(f1, f2) - s2.dn_pair(f1, f2);
  const Field u1 = s1.solve(f1).u, u2 = s2.solve(f2).u;
  cplx r = 0.0;
  for (auto i : s1.interior()) {
    const cplx q1 = p1.q.size() ? p1.q[i] : cplx(0.0);
    const cplx q2 = p2.q.size() ? p2.q[i] : cplx(0.0);
    r += (q1 - q2) * u1[i] * u2[i];
  }
  c.rhs = r * p1.grid.cell_volume();
  const double scale = std::max(std::abs(c.lhs), std::abs(c.rhs));
  c.residual = scale == 0.0 ? 0.0 : std::abs(c.lhs - c.rhs) / scale;
  return c;
}

std::vector<Field> bump_dictionary(const GridSpec& g, const std::vector<Shape>& set, int n) {
  if (n < 1) throw DomainError("dictionary size must be positive");
  if (set.empty()) throw PreconditionError("empty source set");
  Point lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& s : set)
    for (int d = 0; d < g.dim; ++d) {
      const double a = s.kind == Shape::Kind::Ball ? s.a[d] - s.radius : s.a[d];
      const double b = s.kind == Shape::Kind::Ball ? s.a[d] + s.radius : s.b[d];
      lo[d] = std::min(lo[d], a);
      hi[d] = std::max(hi[d], b);
    }
  const auto in_set = membership(g, set);
  const double w = 2.0 * g.spacing();
  const int bases[3] = {2, 3, 5};
  std::vector<Field> out;
  for (std::size_t k = 1; static_cast<int>(out.size()) < n; ++k) {
    if (k > 1000000) throw PreconditionError("source set too thin for the dictionary");
    Point c{};
    for (int d = 0; d < g.dim; ++d) c[d] = lo[d] + (hi[d] - lo[d]) * halton(k, bases[d]);
    if (!in_union(set, c, g.dim)) continue;
    std::vector<cplx> vals(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in_set[i]) {
        const double r = distance(g.point(i), c, g.dim);
        vals[i] = std::exp(-r * r / (2.0 * w * w));
      }
    DecayCertificate cert;
    cert.C = 1.0;
    cert.numerically_zero_tail = true;
    out.emplace_back(g, std::move(vals), cert);
  }
  return out;
}

RungeResult runge_approximate(const ExteriorSolver& s, const Eigen::VectorXcd& g_interior, int n_sources,
                              double lambda) {
  const auto& nodes = s.interior();
  if (static_cast<std::size_t>(g_interior.size()) != nodes.size())
    throw PreconditionError("target must be given on Omega nodes");
  if (lambda < 0.0) throw DomainError("regularization must be nonnegative");
  const auto& p = s.problem();
  const auto dict = bump_dictionary(p.grid, p.W1, n_sources);
  const double w = std::sqrt(p.grid.cell_volume());
  Eigen::MatrixXcd U(nodes.size(), dict.size());
  parallel_for(dict.size(), [&](std::size_t j) {
    const Field u = s.solve(dict[j]).u;
    for (std::size_t i = 0; i < nodes.size(); ++i) U(i, j) = u[nodes[i]];
  });
  const Tikhonov t = tikhonov(w * U, w * g_interior, lambda);
  RungeResult r;
  r.coeffs = t.c;
  r.condition = t.condition;
  if (t.condition > 1e12) {
    std::ostringstream os;
    os << "normal matrix condition " << t.condition << " exceeds 1e12; increase the regularization";
    r.advisory = os.str();
  }
  r.u_interior = U * t.c;
  r.error = w * (r.u_interior - g_interior).norm();
  const double gn = w * g_interior.norm();
  r.relative_error = gn == 0.0 ? r.error : r.error / gn;
  r.objective = r.error * r.error + lambda * t.c.squaredNorm();
  Field src = Field::zeros(p.grid);
  for (std::size_t j = 0; j < dict.size(); ++j) src = src + dict[j] * t.c(j);
  r.source = src;
  return r;
}

DNMatrix ip2_measure(const ExteriorSolver& truth, const IP2Options& opt) {
  const auto& p = truth.problem();
  return dn_matrix(truth, bump_dictionary(p.grid, p.W1, opt.n_sources),
                   bump_dictionary(p.grid, p.W2, opt.n_receivers));
}

Reconstruction reconstruct_q(const DNMatrix& data, const ExteriorSolver& reference, const IP2Options& opt) {
  const auto& p = reference.problem();
  const auto& nodes = reference.interior();
  const std::size_t N = nodes.size(), I = data.sources.size(), J = data.receivers.size();
  if (I == 0 || J == 0 || data.entries.rows() != static_cast<Eigen::Index>(I) ||
      data.entries.cols() != static_cast<Eigen::Index>(J))
    throw PreconditionError("DN data does not match its sources and receivers");
  if (p.q.size() != 0 && p.q.max_abs() != 0.0) throw PreconditionError("reference problem must have q = 0");
  const double hn = p.grid.cell_volume();

  // Receiver solutions of the reference problem turn the DN difference into
  // moments of w_i = q u_i against them.
  const DNMatrix D0 = dn_matrix(reference, data.sources, data.receivers);
  Eigen::MatrixXcd U0(N, J);
  parallel_for(J, [&](std::size_t j) {
    const Field u = reference.solve(data.receivers[j]).u;
    for (std::size_t i = 0; i < N; ++i) U0(i, j) = u[nodes[i]];
  });
  const Eigen::MatrixXcd dD = data.entries - D0.entries;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(hn * U0.transpose()), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Reconstruction rec;
  rec.singular_values.assign(sv.data(), sv.data() + sv.size());
  int k = 0;
  while (k < sv.size() && sv(k) > opt.svd_cutoff * sv(0)) ++k;
  rec.rank = k;
  if (k == 0) throw ConvergenceError("receiver solutions carry no information");
  const Eigen::MatrixXcd W = svd.matrixV().leftCols(k) * sv.head(k).cwiseInverse().asDiagonal() *
                             svd.matrixU().leftCols(k).adjoint() * dD.transpose();

  // Interior parts of the unknown solutions: A0 v_i = -(L f_i) - w_i.
  Eigen::MatrixXcd Us(N, I);
  parallel_for(I, [&](std::size_t i) {
    const Field Lf = reference.apply_L(data.sources[i]);
    Eigen::VectorXcd rhs(N);
    for (std::size_t n = 0; n < N; ++n) rhs(n) = -Lf[nodes[n]] - W(n, i);
    Us.col(i) = reference.solve_interior(rhs);
  });

  const double w = std::sqrt(hn);
  const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(N);
  const Tikhonov t = tikhonov(w * Us, w * one, opt.runge_lambda);
  const Eigen::VectorXcd u = Us * t.c, qu = W * t.c;
  rec.runge_error = (u - one).norm() / one.norm();
  if (!(rec.runge_error <= opt.eta)) {
    std::ostringstream os;
    os << "Runge error " << rec.runge_error << " above eta = " << opt.eta << "; reconstruction refused";
    throw ConvergenceError(os.str());
  }
  std::vector<cplx> vals(p.grid.size(), 0.0);
  rec.masked.assign(N, false);
  for (std::size_t n = 0; n < N; ++n) {
    if (std::abs(u(n)) < opt.mask_level) {
      rec.masked[n] = true;
      ++rec.masked_count;
      continue;
    }
    vals[nodes[n]] = qu(n) / u(n);
  }
  rec.q = Field(p.grid, std::move(vals));
  return rec;
}

double reconstruction_error(const Reconstruction& r, const Field& q_true, const std::vector<std::size_t>& nodes) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (r.masked[n]) continue;
    num += std::norm(r.q[nodes[n]] - q_true[nodes[n]]);
    den += std::norm(q_true[nodes[n]]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

// ---------------------------------------------------------------------------

namespace {

double chi0(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double s = (r - 0.5) / 0.5;
  const double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
  return a / (a + b);
}

cplx symbol_at(const MatrixField& A, const GridSpec& g, const Point& x0, const Point& xi, double lambda,
               double delta) {
  const int n = g.dim;
  std::vector<cplx> hv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    double phase = 0.0;
    for (int d = 0; d < n; ++d) phase += xi[d] * (p[d] - x0[d]);
    hv[i] = std::polar(chi0(distance(p, x0, n) / delta), lambda * phase);
  }
  const Field h(g, std::move(hv));
  std::vector<Field> grad;
  for (int d = 0; d < n; ++d)
    grad.push_back(fourier_multiplier(h, [d](const Point& k) { return cplx(0.0, k[d]); }));
  std::vector<std::vector<cplx>> flux(n, std::vector<cplx>(g.size(), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Eigen::Matrix3d a = A(g.point(i));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) flux[j][i] += a(j, k) * grad[k][i];
  }
  std::vector<cplx> div(g.size(), 0.0);
  for (int j = 0; j < n; ++j) {
    const Field dj = fourier_multiplier(Field(g, std::move(flux[j])), [j](const Point& k) { return cplx(0.0, k[j]); });
    for (std::size_t i = 0; i < g.size(); ++i) div[i] += dj[i];
  }
  const cplx value = FourierEvaluator(Field(g, std::move(div)))(x0);
  return -value / (lambda * lambda);
}

}  // namespace

SymbolEstimate aniso_symbol_extract(const MatrixField& A, const GridSpec& g, const Point& x0, const Point& xi,
                                    const std::vector<double>& ladder, double delta) {
  if (ladder.empty()) throw DomainError("empty lambda ladder");
  if (!(delta > 0.0)) throw DomainError("cut-off radius must be positive");
  const int n = g.dim;
  double xmax = 0.0;
  for (int d = 0; d < n; ++d) {
    xmax = std::max(xmax, std::abs(xi[d]));
    if (std::abs(x0[d]) + delta >= g.half_width)
      throw TruncationError("cut-off ball around x0 leaves the box");
  }
  if (xmax == 0.0) throw DomainError("direction must be nonzero");
  SymbolEstimate est;
  est.max_admissible_lambda = kPi / (g.spacing() * xmax);
  for (double lam : ladder) {
    if (!(lam > 0.0) || lam >= est.max_admissible_lambda) {
      std::ostringstream os;
      os << "lambda = " << lam << " breaks the Nyquist limit; max admissible lambda is "
         << est.max_admissible_lambda;
      throw DomainError(os.str());
    }
  }
  est.lambdas = ladder;
  for (double lam : ladder) est.values.push_back(symbol_at(A, g, x0, xi, lam, delta));
  // Neville's scheme in t = 1/lambda evaluated at t = 0.
  std::vector<cplx> p(est.values);
  const std::size_t K = ladder.size();
  for (std::size_t m = 1; m < K; ++m)
    for (std::size_t i = 0; i + m < K; ++i) {
      const double ti = 1.0 / ladder[i], tj = 1.0 / ladder[i + m];
      p[i] = (tj * p[i] - ti * p[i + 1]) / (tj - ti);
    }
  est.extrapolated = p[0];
  return est;
}

Eigen::MatrixXd polarize_symbol(const MatrixField& A, const GridSpec& g, const Point& x0,
                                const std::vector<double>& ladder, double delta) {
  const int n = g.dim;
  Eigen::MatrixXd S(n, n);
  auto Q = [&](const Point& xi) { return aniso_symbol_extract(A, g, x0, xi, ladder, delta).extrapolated.real(); };
  for (int j = 0; j < n; ++j) {
    Point e{};
    e[j] = 1.0;
    S(j, j) = Q(e);
    for (int k = 0; k < j; ++k) {
      // Unit diagonals keep each component at lambda / sqrt(2), away from Nyquist.
      const double r = 1.0 / std::sqrt(2.0);
      Point plus{}, minus{};
      plus[j] = plus[k] = r;
      minus[j] = r;
      minus[k] = -r;
      S(j, k) = S(k, j) = 0.5 * (Q(plus) - Q(minus));
    }
  }
  return S;
}

}  // namespace fraclab
