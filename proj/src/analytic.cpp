#include "fraclab/analytic.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr double kShellCut = 6.1;  // exp(-6.1^2) < 1e-16

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

class Parser {
 public:
  explicit Parser(const std::string& t) : text_(t) {}

  AnalyticSpec parse_all() {
    AnalyticSpec s = descriptor();
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
    return s;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("analytic descriptor: " + why + " at offset " + std::to_string(pos_) +
                      " in '" + text_ + "'");
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip();
    std::size_t b = pos_;
    while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (b == pos_) fail("expected name");
    return text_.substr(b, pos_ - b);
  }
  double number() {
    skip();
    double sign = 1.0;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      if (text_[pos_] == '-') sign = -1.0;
      ++pos_;
    }
    skip();
    if (text_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return sign * std::numbers::pi;
    }
    const char* start = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start) fail("expected number");
    pos_ += static_cast<std::size_t>(end - start);
    if (!std::isfinite(v)) fail("non-finite number");
    return sign * v;
  }
  std::vector<double> vec() {
    expect('[');
    std::vector<double> v;
    if (!peek(']')) {
      v.push_back(number());
      while (peek(',')) {
        ++pos_;
        v.push_back(number());
      }
    }
    expect(']');
    return v;
  }
  void comma() { expect(','); }

  AnalyticSpec descriptor() {
    using K = AnalyticSpec::Kind;
    std::string name = ident();
    expect('(');
    AnalyticSpec s;
    if (name == "gaussian") {
      s.kind = K::Gaussian;
      s.center = vec();
      comma();
      s.a = number();
      if (!(s.a > 0.0)) fail("Gaussian width must be positive");
    } else if (name == "polygauss") {
      s.kind = K::PolyGauss;
      s.center = vec();
      comma();
      s.a = number();
      if (!(s.a > 0.0)) fail("Gaussian width must be positive");
      comma();
      for (double p : vec()) {
        if (p < 0 || p != std::floor(p)) fail("powers must be nonnegative integers");
        s.powers.push_back(static_cast<int>(p));
      }
    } else if (name == "bump") {
      s.kind = K::Bump;
      s.center = vec();
      comma();
      s.radius = number();
      if (!(s.radius > 0.0)) fail("bump radius must be positive");
    } else if (name == "shell") {
      s.kind = K::Shell;
      s.center = vec();
      comma();
      s.radius = number();
      comma();
      s.width = number();
      if (!(s.width > 0.0)) fail("shell width must be positive");
    } else if (name == "expdecay") {
      s.kind = K::ExpDecay;
      s.center = vec();
      comma();
      s.rate = number();
    } else if (name == "sine") {
      s.kind = K::Sine;
      s.rate = number();
      comma();
      s.axis = static_cast<int>(number());
    } else if (name == "const") {
      s.kind = K::Const;
      s.value = number();
    } else if (name == "zero") {
      s.kind = K::Zero;
    } else if (name == "sum") {
      s.kind = K::Sum;
      s.children.push_back(descriptor());
      while (peek(',')) {
        ++pos_;
        s.children.push_back(descriptor());
      }
    } else if (name == "scale") {
      s.kind = K::Scale;
      s.value = number();
      comma();
      s.children.push_back(descriptor());
    } else {
      fail("unknown descriptor '" + name + "'");
    }
    expect(')');
    return s;
  }
};

double dist2(const Point& x, const std::vector<double>& c, int dim) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    double cd = d < static_cast<int>(c.size()) ? c[d] : 0.0;
    r2 += (x[d] - cd) * (x[d] - cd);
  }
  return r2;
}

double center_norm(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

std::optional<DecayCertificate> certificate(const AnalyticSpec& s, int dim) {
  using K = AnalyticSpec::Kind;
  const double c = center_norm(s.center);
  switch (s.kind) {
    case K::Gaussian: {
      double A = std::pow(4.0 * std::numbers::pi * s.a, -0.5 * dim);
      return DecayCertificate{A * std::exp(c * c / (4.0 * s.a)), 1.0 / (8.0 * s.a), 2.0, false};
    }
    case K::PolyGauss: {
      double A = std::pow(4.0 * std::numbers::pi * s.a, -0.5 * dim);
      int P = 0;
      for (int p : s.powers) P += p;
      double K = P > 0 ? std::pow(4.0 * s.a * P / std::numbers::e, 0.5 * P) : 1.0;
      return DecayCertificate{A * K * std::exp(c * c / (8.0 * s.a)), 1.0 / (16.0 * s.a), 2.0, false};
    }
    case K::Bump:
      return DecayCertificate{std::exp(-1.0), 0.0, 2.0, true};
    case K::Shell:
      return DecayCertificate{1.0, 0.0, 2.0, true};
    case K::Zero:
      return DecayCertificate{0.0, 0.0, 2.0, true};
    case K::ExpDecay:
    case K::Sine:
    case K::Const:
      return std::nullopt;
    case K::Scale: {
      auto d = certificate(s.children[0], dim);
      if (d) d->C *= std::abs(s.value);
      return d;
    }
    case K::Sum: {
      DecayCertificate acc{0.0, std::numeric_limits<double>::infinity(), 1e300, true};
      for (const auto& ch : s.children) {
        auto d = certificate(ch, dim);
        if (!d) return std::nullopt;
        acc.C += d->C;
        if (!d->numerically_zero_tail) {
          acc.numerically_zero_tail = false;
          acc.rho = std::min(acc.rho, d->rho);
          acc.gamma = std::min(acc.gamma, d->gamma);
        }
      }
      if (acc.numerically_zero_tail) {
        acc.rho = 0.0;
        acc.gamma = 2.0;
      }
      return acc;
    }
  }
  return std::nullopt;
}

}  // namespace

AnalyticSpec AnalyticSpec::parse(const std::string& text) { return Parser(text).parse_all(); }

std::string AnalyticSpec::to_string() const {
  switch (kind) {
    case Kind::Gaussian:
      return "gaussian(" + fmt_vec(center) + ", " + fmt(a) + ")";
    case Kind::PolyGauss: {
      std::vector<double> p(powers.begin(), powers.end());
      return "polygauss(" + fmt_vec(center) + ", " + fmt(a) + ", " + fmt_vec(p) + ")";
    }
    case Kind::Bump:
      return "bump(" + fmt_vec(center) + ", " + fmt(radius) + ")";
    case Kind::Shell:
      return "shell(" + fmt_vec(center) + ", " + fmt(radius) + ", " + fmt(width) + ")";
    case Kind::ExpDecay:
      return "expdecay(" + fmt_vec(center) + ", " + fmt(rate) + ")";
    case Kind::Sine:
      return "sine(" + fmt(rate) + ", " + std::to_string(axis) + ")";
    case Kind::Const:
      return "const(" + fmt(value) + ")";
    case Kind::Zero:
      return "zero()";
    case Kind::Sum: {
      std::string s = "sum(";
      for (std::size_t i = 0; i < children.size(); ++i) s += (i ? ", " : "") + children[i].to_string();
      return s + ")";
    }
    case Kind::Scale:
      return "scale(" + fmt(value) + ", " + children[0].to_string() + ")";
  }
  return "zero()";
}

double AnalyticSpec::eval(const Point& x, int dim) const {
  switch (kind) {
    case Kind::Gaussian:
      return std::pow(4.0 * std::numbers::pi * a, -0.5 * dim) * std::exp(-dist2(x, center, dim) / (4.0 * a));
    case Kind::PolyGauss: {
      double poly = 1.0;
      for (int d = 0; d < dim && d < static_cast<int>(powers.size()); ++d) {
        double cd = d < static_cast<int>(center.size()) ? center[d] : 0.0;
        poly *= std::pow(x[d] - cd, powers[d]);
      }
      return poly * std::pow(4.0 * std::numbers::pi * a, -0.5 * dim) *
             std::exp(-dist2(x, center, dim) / (4.0 * a));
    }
    case Kind::Bump: {
      double q = dist2(x, center, dim) / (radius * radius);
      return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
    }
    case Kind::Shell: {
      double d = (std::sqrt(dist2(x, center, dim)) - radius) / width;
      return std::abs(d) < kShellCut ? std::exp(-d * d) : 0.0;
    }
    case Kind::ExpDecay:
      return std::exp(-rate * std::sqrt(dist2(x, center, dim)));
    case Kind::Sine:
      return std::sin(rate * x[axis]);
    case Kind::Const:
      return value;
    case Kind::Zero:
      return 0.0;
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& c : children) s += c.eval(x, dim);
      return s;
    }
    case Kind::Scale:
      return value * children[0].eval(x, dim);
  }
  return 0.0;
}

double AnalyticSpec::support_radius(int dim) const {
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::Bump:
      return center_norm(center) + radius;
    case Kind::Shell:
      return center_norm(center) + radius + kShellCut * width;
    case Kind::Zero:
      return 0.0;
    case Kind::Sum: {
      double r = 0.0;
      for (const auto& c : children) r = std::max(r, c.support_radius(dim));
      return r;
    }
    case Kind::Scale:
      return value == 0.0 ? 0.0 : children[0].support_radius(dim);
    default:
      return inf;
  }
}

AnalyticSpec AnalyticSpec::gaussian(std::vector<double> c, double a) {
  AnalyticSpec s;
  s.kind = Kind::Gaussian;
  s.center = std::move(c);
  s.a = a;
  return s;
}

AnalyticSpec AnalyticSpec::bump(std::vector<double> c, double R) {
  AnalyticSpec s;
  s.kind = Kind::Bump;
  s.center = std::move(c);
  s.radius = R;
  return s;
}

AnalyticSpec AnalyticSpec::shell(std::vector<double> c, double r0, double w) {
  AnalyticSpec s;
  s.kind = Kind::Shell;
  s.center = std::move(c);
  s.radius = r0;
  s.width = w;
  return s;
}

AnalyticSpec AnalyticSpec::sum(std::vector<AnalyticSpec> parts) {
  AnalyticSpec s;
  s.kind = Kind::Sum;
  s.children = std::move(parts);
  return s;
}

AnalyticSpec AnalyticSpec::scaled(double k, AnalyticSpec d) {
  AnalyticSpec s;
  s.kind = Kind::Scale;
  s.value = k;
  s.children.push_back(std::move(d));
  return s;
}

Field sample_analytic(const GridSpec& grid, const AnalyticSpec& spec) {
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = spec.eval(grid.point(i), grid.dim);
  auto cert = certificate(spec, grid.dim);
  if (cert) {
    double peak = 0.0, edge = 0.0;
    const int M = grid.points_per_axis;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double a = std::abs(v[i]);
      peak = std::max(peak, a);
      auto idx = grid.index(i);
      for (int d = 0; d < grid.dim; ++d)
        if (idx[d] == 0 || idx[d] == M - 1) edge = std::max(edge, a);
    }
    if (edge > 1e-12 * peak)
      throw TruncationError("descriptor " + spec.to_string() + " is not negligible at the box boundary (" +
                            fmt(edge / peak) + " relative)");
    if (cert->numerically_zero_tail) cert->C = peak;
  }
  return Field(grid, std::move(v), cert);
}

}  // namespace fraclab
