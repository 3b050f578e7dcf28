#include "fraclab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

// FFTW planning is not thread safe; execution with new arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }
  fftw_plan get(int dim, int M, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(dim, M, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(M);
    std::vector<fftw_complex> in(n), out(n);
    int dims[3] = {M, M, M};
    fftw_plan p = fftw_plan_dft(dim, dims, in.data(), out.data(), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_[key] = p;
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

std::vector<cplx> run(const GridSpec& g, const std::vector<cplx>& in, int sign) {
  if (in.size() != g.size()) throw PreconditionError("transform size mismatch");
  fftw_plan p = PlanCache::instance().get(g.dim, g.points_per_axis, sign);
  std::vector<cplx> out(in.size());
  std::vector<cplx> src(in);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

template <class F>
void for_each_frequency(const GridSpec& g, F&& f) {
  const auto freq = frequencies(g);
  const int M = g.points_per_axis;
  Point xi{0.0, 0.0, 0.0};
  std::size_t flat = 0;
  if (g.dim == 1) {
    for (int a = 0; a < M; ++a) {
      xi[0] = freq[a];
      f(flat++, xi);
    }
  } else if (g.dim == 2) {
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        xi[0] = freq[a];
        xi[1] = freq[b];
        f(flat++, xi);
      }
  } else {
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        for (int c = 0; c < M; ++c) {
          xi[0] = freq[a];
          xi[1] = freq[b];
          xi[2] = freq[c];
          f(flat++, xi);
        }
  }
}

}  // namespace

std::vector<double> frequencies(const GridSpec& g) {
  const int M = g.points_per_axis;
  const double base = std::numbers::pi / g.half_width;
  std::vector<double> f(M);
  for (int k = 0; k < M; ++k) f[k] = base * (k < M / 2 ? k : k - M);
  return f;
}

std::vector<cplx> fft_forward(const GridSpec& g, const std::vector<cplx>& values) {
  return run(g, values, FFTW_FORWARD);
}

std::vector<cplx> fft_inverse(const GridSpec& g, const std::vector<cplx>& coeffs) {
  auto out = run(g, coeffs, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : out) v *= scale;
  return out;
}

Field fourier_multiplier(const Field& u, const Symbol& sigma) {
  const auto& g = u.grid();
  auto c = fft_forward(g, u.values());
  for_each_frequency(g, [&](std::size_t k, const Point& xi) {
    cplx s = sigma(xi);
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      std::ostringstream os;
      os << "symbol not finite at frequency (";
      for (int d = 0; d < g.dim; ++d) os << (d ? ", " : "") << xi[d];
      os << ")";
      throw DomainError(os.str());
    }
    c[k] *= s;
  });
  return Field(g, fft_inverse(g, c));
}

Field radial_multiplier(const Field& u, const std::function<cplx(double)>& sigma) {
  return fourier_multiplier(u, [&](const Point& xi) { return sigma(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); });
}

Field frac_lap_fourier(const Field& u, double s) {
  if (!(s >= 0.0)) throw DomainError("fractional order must be nonnegative");
  if (s == 0.0) return u;
  return radial_multiplier(u, [s](double xi2) { return xi2 == 0.0 ? 0.0 : std::pow(xi2, s); });
}

Field laplacian_power(const Field& u, int m) {
  if (m < 0) throw DomainError("Laplacian power must be nonnegative");
  if (m == 0) return u;
  Field out = radial_multiplier(u, [m](double xi2) { return std::pow(-xi2, m); });
  if (u.decay() && u.decay()->numerically_zero_tail) return out.with_decay(u.decay());
  return out;
}

Field mollify(const Field& u, double eps, double eps0) {
  if (!(eps > 0.0)) throw DomainError("mollifier radius must be positive");
  if (!(eps < eps0))
    throw MarginError("mollifier radius " + std::to_string(eps) + " >= margin " + std::to_string(eps0));
  const auto& g = u.grid();
  const int M = g.points_per_axis;
  const double h = g.spacing();
  std::vector<cplx> ker(g.size());
  for (std::size_t i = 0; i < ker.size(); ++i) {
    auto idx = g.index(i);
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      double y = (idx[d] < M / 2 ? idx[d] : idx[d] - M) * h;
      r2 += y * y;
    }
    double q = r2 / (eps * eps);
    ker[i] = q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
  }
  auto khat = fft_forward(g, ker);
  const double mass = khat[0].real();
  auto c = fft_forward(g, u.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= khat[k].real() / mass;
  return Field(g, fft_inverse(g, c), u.decay());
}

FourierEvaluator::FourierEvaluator(const Field& u) : grid_(u.grid()), freq_(frequencies(u.grid())) {
  auto c = fft_forward(grid_, u.values());
  const double scale = 1.0 / static_cast<double>(grid_.size());
  re_.resize(c.size());
  im_.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    re_[k] = c[k].real() * scale;
    im_[k] = c[k].imag() * scale;
  }
}

cplx FourierEvaluator::operator()(const Point& x) const {
  const int M = grid_.points_per_axis;
  const int n = grid_.dim;
  // Per-axis phases exp(i xi (x - x0)); the Nyquist mode uses the symmetric
  // cosine so real data interpolates to real values.
  std::vector<double> er(n * M), ei(n * M);
  for (int d = 0; d < n; ++d) {
    const double off = x[d] + grid_.half_width;
    for (int k = 0; k < M; ++k) {
      double ph = freq_[k] * off;
      er[d * M + k] = std::cos(ph);
      ei[d * M + k] = k == M / 2 ? 0.0 : std::sin(ph);
    }
  }
  const double* r = re_.data();
  const double* i = im_.data();
  if (n == 1) {
    double sr = 0.0, si = 0.0;
    for (int k = 0; k < M; ++k) {
      sr += r[k] * er[k] - i[k] * ei[k];
      si += r[k] * ei[k] + i[k] * er[k];
    }
    return {sr, si};
  }
  auto inner = [&](std::size_t base, const double* pr, const double* pi, double& outr, double& outi) {
    double sr = 0.0, si = 0.0;
    for (int k = 0; k < M; ++k) {
      const double a = r[base + k], b = i[base + k];
      sr += a * pr[k] - b * pi[k];
      si += a * pi[k] + b * pr[k];
    }
    outr = sr;
    outi = si;
  };
  double tr = 0.0, ti = 0.0;
  if (n == 2) {
    const double* e1r = er.data() + M;
    const double* e1i = ei.data() + M;
    for (int a = 0; a < M; ++a) {
      double sr, si;
      inner(static_cast<std::size_t>(a) * M, e1r, e1i, sr, si);
      tr += sr * er[a] - si * ei[a];
      ti += sr * ei[a] + si * er[a];
    }
    return {tr, ti};
  }
  const double* e1r = er.data() + M;
  const double* e1i = ei.data() + M;
  const double* e2r = er.data() + 2 * M;
  const double* e2i = ei.data() + 2 * M;
  for (int a = 0; a < M; ++a) {
    double ar = 0.0, ai = 0.0;
    for (int b = 0; b < M; ++b) {
      double sr, si;
      inner((static_cast<std::size_t>(a) * M + b) * M, e2r, e2i, sr, si);
      ar += sr * e1r[b] - si * e1i[b];
      ai += sr * e1i[b] + si * e1r[b];
    }
    tr += ar * er[a] - ai * ei[a];
    ti += ar * ei[a] + ai * er[a];
  }
  return {tr, ti};
}

}  // namespace fraclab

namespace fraclab {

namespace {
constexpr int kSpread = 12;
}

GriddingEvaluator::GriddingEvaluator(const Field& u) : grid_(u.grid()) {
  const int M = grid_.points_per_axis, n = grid_.dim;
  fine_ = 2 * M;
  tau_ = std::numbers::pi * kSpread / (3.0 * M * M);
  const GridSpec fg = GridSpec::make(n, grid_.half_width, fine_);
  auto c = fft_forward(grid_, u.values());
  std::vector<cplx> C(fg.size());
  const double inv_n = 1.0 / static_cast<double>(grid_.size());
  // Deconvolution factor 1 / ghat(k), ghat(k) = sqrt(tau/pi) exp(-k^2 tau).
  auto deconv = [&](int k) { return std::exp(k * static_cast<double>(k) * tau_) / std::sqrt(tau_ / std::numbers::pi); };
  for (std::size_t f = 0; f < c.size(); ++f) {
    auto idx = grid_.index(f);
    // Each axis maps to one fine slot, or two half-weight slots for Nyquist.
    std::array<std::array<int, 2>, 3> slot{};
    std::array<int, 3> nslot{};
    std::array<double, 3> fac{};
    for (int d = 0; d < n; ++d) {
      const int k = idx[d] < M / 2 ? idx[d] : idx[d] - M;
      if (idx[d] == M / 2) {
        slot[d] = {M / 2, fine_ - M / 2};
        nslot[d] = 2;
        fac[d] = 0.5 * deconv(M / 2);
      } else {
        slot[d] = {k >= 0 ? k : fine_ + k, 0};
        nslot[d] = 1;
        fac[d] = deconv(k);
      }
    }
    double w = inv_n;
    for (int d = 0; d < n; ++d) w *= fac[d];
    const cplx v = c[f] * w;
    for (int a = 0; a < nslot[0]; ++a)
      for (int b = 0; b < (n > 1 ? nslot[1] : 1); ++b)
        for (int e = 0; e < (n > 2 ? nslot[2] : 1); ++e) {
          std::array<int, 3> fi{slot[0][a], n > 1 ? slot[1][b] : 0, n > 2 ? slot[2][e] : 0};
          C[fg.flat(fi)] += v;
        }
  }
  values_ = fft_inverse(fg, C);
  const double norm_back = static_cast<double>(fg.size());
  // Fold the trapezoid factor 1/fine per axis into the stored values.
  const double trap = std::pow(static_cast<double>(fine_), -n);
  for (auto& x : values_) x *= norm_back * trap;
}

cplx GriddingEvaluator::operator()(const Point& x) const {
  const int n = grid_.dim;
  const double hf = 2.0 * std::numbers::pi / fine_;
  const int W = 2 * kSpread;
  std::array<std::array<double, 2 * kSpread>, 3> wt{};
  std::array<std::array<int, 2 * kSpread>, 3> ix{};
  for (int d = 0; d < n; ++d) {
    const double th = (x[d] + grid_.half_width) * std::numbers::pi / grid_.half_width;
    const int l0 = static_cast<int>(std::floor(th / hf));
    for (int j = 0; j < W; ++j) {
      const int l = l0 - kSpread + 1 + j;
      const double dl = th - l * hf;
      wt[d][j] = std::exp(-dl * dl / (4.0 * tau_));
      ix[d][j] = ((l % fine_) + fine_) % fine_;
    }
  }
  const std::size_t F = static_cast<std::size_t>(fine_);
  cplx s = 0.0;
  if (n == 1) {
    for (int a = 0; a < W; ++a) s += wt[0][a] * values_[ix[0][a]];
  } else if (n == 2) {
    for (int a = 0; a < W; ++a) {
      cplx row = 0.0;
      const std::size_t base = ix[0][a] * F;
      for (int b = 0; b < W; ++b) row += wt[1][b] * values_[base + ix[1][b]];
      s += wt[0][a] * row;
    }
  } else {
    for (int a = 0; a < W; ++a) {
      cplx plane = 0.0;
      for (int b = 0; b < W; ++b) {
        const std::size_t base = (ix[0][a] * F + ix[1][b]) * F;
        cplx row = 0.0;
        for (int e = 0; e < W; ++e) row += wt[2][e] * values_[base + ix[2][e]];
        plane += wt[1][b] * row;
      }
      s += wt[0][a] * plane;
    }
  }
  return s;
}

}  // namespace fraclab
