#include "fraclab/grid.hpp"

#include <cmath>
#include <limits>

#include "fraclab/errors.hpp"

namespace fraclab {

GridSpec GridSpec::make(int dim, double half_width, int points_per_axis) {
  if (dim < 1 || dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw DomainError("grid half width must be positive");
  if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0)
    throw DomainError("points per axis must be a power of two >= 8");
  return GridSpec{dim, half_width, points_per_axis};
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_axis);
  return n;
}

std::array<int, 3> GridSpec::index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % points_per_axis);
    flat /= points_per_axis;
  }
  return idx;
}

std::size_t GridSpec::flat(const std::array<int, 3>& idx) const {
  std::size_t f = 0;
  for (int d = 0; d < dim; ++d) f = f * points_per_axis + static_cast<std::size_t>(idx[d]);
  return f;
}

Point GridSpec::point(std::size_t f) const {
  auto idx = index(f);
  Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) p[d] = coord(idx[d]);
  return p;
}

std::size_t GridSpec::center_index() const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = 0; d < dim; ++d) idx[d] = points_per_axis / 2;
  return flat(idx);
}

double norm(const Point& p, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += p[d] * p[d];
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

double DecayCertificate::bound_at(double r) const {
  if (numerically_zero_tail) return 0.0;
  return C * std::exp(-rho * std::pow(r, gamma));
}

Field::Field(GridSpec grid, std::vector<cplx> values, std::optional<DecayCertificate> decay)
    : grid_(grid), values_(std::move(values)), decay_(decay) {
  if (values_.size() != grid_.size())
    throw PreconditionError("field value count does not match grid size");
  if (decay_ && !decay_->numerically_zero_tail && !(decay_->gamma > 1.0 && decay_->rho > 0.0))
    throw PreconditionError("decay certificate needs gamma > 1 and rho > 0");
}

Field Field::zeros(const GridSpec& grid) {
  DecayCertificate c;
  c.numerically_zero_tail = true;
  return Field(grid, std::vector<cplx>(grid.size()), c);
}

Field Field::with_decay(std::optional<DecayCertificate> d) const { return Field(grid_, values_, d); }

double Field::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::l2_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s * grid_.cell_volume());
}

double Field::l1_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::abs(v);
  return s * grid_.cell_volume();
}

cplx Field::integral() const {
  cplx s = 0.0;
  for (const auto& v : values_) s += v;
  return s * grid_.cell_volume();
}

double Field::truncation_bound() const {
  if (!decay_) return std::numeric_limits<double>::infinity();
  return decay_->bound_at(0.5 * grid_.half_width);
}

namespace {
std::optional<DecayCertificate> combine(const std::optional<DecayCertificate>& a,
                                        const std::optional<DecayCertificate>& b, double kb) {
  if (!a || !b) return std::nullopt;
  if (a->numerically_zero_tail && b->numerically_zero_tail) {
    DecayCertificate c = *a;
    c.C = a->C + std::abs(kb) * b->C;
    return c;
  }
  if (a->numerically_zero_tail) {
    DecayCertificate c = *b;
    c.C *= std::abs(kb);
    return c;
  }
  if (b->numerically_zero_tail) return a;
  DecayCertificate c;
  c.C = a->C + std::abs(kb) * b->C;
  c.rho = std::min(a->rho, b->rho);
  c.gamma = std::min(a->gamma, b->gamma);
  return c;
}
}  // namespace

Field Field::operator+(const Field& o) const {
  if (!(grid_ == o.grid_)) throw PreconditionError("grid mismatch");
  std::vector<cplx> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
  return Field(grid_, std::move(v), combine(decay_, o.decay_, 1.0));
}

Field Field::operator-(const Field& o) const {
  if (!(grid_ == o.grid_)) throw PreconditionError("grid mismatch");
  std::vector<cplx> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
  return Field(grid_, std::move(v), combine(decay_, o.decay_, 1.0));
}

Field Field::operator*(cplx k) const {
  std::vector<cplx> v(values_);
  for (auto& x : v) x *= k;
  std::optional<DecayCertificate> d = decay_;
  if (d) d->C *= std::abs(k);
  if (d && k == 0.0) d->numerically_zero_tail = true;
  return Field(grid_, std::move(v), d);
}

Shape Shape::ball(const Point& c, double r) {
  Shape s;
  s.kind = Kind::Ball;
  s.a = c;
  s.radius = r;
  return s;
}

Shape Shape::box(const Point& lo, const Point& hi) {
  Shape s;
  s.kind = Kind::Box;
  s.a = lo;
  s.b = hi;
  return s;
}

bool Shape::contains(const Point& p, int dim) const {
  if (kind == Kind::Ball) return distance(p, a, dim) < radius;
  for (int d = 0; d < dim; ++d)
    if (!(p[d] > a[d] && p[d] < b[d])) return false;
  return true;
}

Shape Shape::shrunk(double eps) const {
  Shape s = *this;
  if (kind == Kind::Ball) {
    s.radius = radius - eps;
  } else {
    for (int d = 0; d < 3; ++d) {
      s.a[d] += eps;
      s.b[d] -= eps;
    }
  }
  return s;
}

Point Shape::center() const {
  if (kind == Kind::Ball) return a;
  Point c{};
  for (int d = 0; d < 3; ++d) c[d] = 0.5 * (a[d] + b[d]);
  return c;
}

bool in_union(const std::vector<Shape>& shapes, const Point& p, int dim) {
  for (const auto& s : shapes)
    if (s.contains(p, dim)) return true;
  return false;
}

double RegionSpec::margin(const GridSpec& g) const {
  std::vector<Point> om, out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (in_omega(p, g.dim)) om.push_back(p);
    if (!in_O(p, g.dim)) out.push_back(p);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : om)
    for (const auto& q : out) best = std::min(best, distance(p, q, g.dim));
  return best;
}

void RegionSpec::validate(const GridSpec& g) const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("kappa must lie in (0,1)");
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (in_omega(p, g.dim)) {
      any = true;
      if (!in_O(p, g.dim)) throw MarginError("omega node outside O");
    }
  }
  if (!any) throw PreconditionError("omega contains no grid node");
  double m = margin(g);
  if (m < 2.0 * kappa)
    throw MarginError("dist(omega, complement of O) = " + std::to_string(m) + " < 2 kappa");
}

RegionSpec RegionSpec::shrunk(double eps) const {
  RegionSpec r = *this;
  for (auto& s : r.O) s = s.shrunk(eps);
  return r;
}

double max_abs_on(const Field& v, const std::vector<Shape>& set) {
  const auto& g = v.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (in_union(set, g.point(i), g.dim)) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace fraclab
