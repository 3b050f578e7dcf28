#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace fraclab {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;

/// Uniform tensor grid on [-L, L)^n with M points per axis.
struct GridSpec {
  int dim = 2;
  double half_width = 12.0;
  int points_per_axis = 256;

  /// Validating constructor: n in {1,2,3}, L > 0, M >= 8 a power of two.
  static GridSpec make(int dim, double half_width, int points_per_axis);

  double spacing() const { return 2.0 * half_width / points_per_axis; }
  double cell_volume() const;
  std::size_t size() const;
  double coord(int i) const { return -half_width + i * spacing(); }
  std::array<int, 3> index(std::size_t flat) const;
  std::size_t flat(const std::array<int, 3>& idx) const;
  Point point(std::size_t flat) const;
  /// Grid node closest to the box centre (index M/2 on every axis).
  std::size_t center_index() const;

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && half_width == o.half_width && points_per_axis == o.points_per_axis;
  }
};

double norm(const Point& p, int dim);
double distance(const Point& a, const Point& b, int dim);

/// |u(x)| <= C exp(-rho |x|^gamma). A compactly supported or numerically
/// vanishing tail is flagged instead of fitted.
struct DecayCertificate {
  double C = 0.0;
  double rho = 0.0;
  double gamma = 2.0;
  bool numerically_zero_tail = false;

  /// Bound on |u| beyond radius r.
  double bound_at(double r) const;
};

/// Complex samples on a grid. Immutable once built.
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, std::vector<cplx> values,
        std::optional<DecayCertificate> decay = std::nullopt);

  static Field zeros(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  const std::vector<cplx>& values() const { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  const std::optional<DecayCertificate>& decay() const { return decay_; }

  Field with_decay(std::optional<DecayCertificate> d) const;

  double max_abs() const;
  /// Grid L2 norm, sqrt(h^n sum |u|^2).
  double l2_norm() const;
  double l1_norm() const;
  cplx integral() const;
  /// Truncation-error bound C exp(-rho (L/2)^gamma), zero when no tail.
  double truncation_bound() const;

  Field operator+(const Field& o) const;
  Field operator-(const Field& o) const;
  Field operator*(cplx k) const;

 private:
  GridSpec grid_;
  std::vector<cplx> values_;
  std::optional<DecayCertificate> decay_;
};

/// Ball or axis-aligned box.
struct Shape {
  enum class Kind { Ball, Box };
  Kind kind = Kind::Ball;
  Point a{};  // ball centre or box lower corner
  Point b{};  // box upper corner
  double radius = 0.0;

  static Shape ball(const Point& c, double r);
  static Shape box(const Point& lo, const Point& hi);

  bool contains(const Point& p, int dim) const;
  /// Same shape shrunk inward by eps.
  Shape shrunk(double eps) const;
  Point center() const;
};

bool in_union(const std::vector<Shape>& shapes, const Point& p, int dim);

/// Vanishing set O, observation set omega inside it, margin kappa.
struct RegionSpec {
  std::vector<Shape> O;
  std::vector<Shape> omega;
  double kappa = 0.25;

  bool in_O(const Point& p, int dim) const { return in_union(O, p, dim); }
  bool in_omega(const Point& p, int dim) const { return in_union(omega, p, dim); }

  /// Minimum distance from omega grid nodes to grid nodes outside O.
  double margin(const GridSpec& g) const;
  /// Throws unless kappa in (0,1), omega has nodes, omega lies in O and the
  /// 2 kappa margin holds at grid nodes.
  void validate(const GridSpec& g) const;
  /// O shrunk by eps (omega and kappa unchanged).
  RegionSpec shrunk(double eps) const;
};

/// max |v| over grid nodes inside O.
double max_abs_on(const Field& v, const std::vector<Shape>& set);

}  // namespace fraclab
