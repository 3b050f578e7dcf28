#pragma once

#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/**
 * Closed-form test function. Text grammar (whitespace free form):
 *
 *   gaussian([c], a)          (4 pi a)^{-n/2} exp(-|x-c|^2 / 4a)
 *   polygauss([c], a, [p])    prod_i (x_i - c_i)^{p_i} * gaussian([c], a)
 *   bump([c], R)              exp(-1/(1 - |x-c|^2/R^2)) inside the ball
 *   shell([c], r0, w)         exp(-(|x-c| - r0)^2 / w^2), cut to exact zero
 *                             where the Gaussian factor drops below 1e-16
 *   expdecay([c], rho)        exp(-rho |x-c|)  (not super-exponential)
 *   sine(k, axis)             sin(k x_axis)
 *   const(k)
 *   zero()
 *   sum(d1, d2, ...)
 *   scale(k, d)
 *
 * Vectors are written [x, y, z]; the token pi is accepted as a number.
 */
struct AnalyticSpec {
  enum class Kind { Gaussian, PolyGauss, Bump, Shell, ExpDecay, Sine, Const, Zero, Sum, Scale };
  Kind kind = Kind::Zero;
  std::vector<double> center;
  double a = 1.0;       // Gaussian variance parameter
  double radius = 1.0;  // bump radius or shell radius
  double width = 1.0;   // shell width
  double rate = 1.0;    // expdecay rate or sine wavenumber
  double value = 0.0;   // const value or scale factor
  int axis = 0;
  std::vector<int> powers;
  std::vector<AnalyticSpec> children;

  static AnalyticSpec parse(const std::string& text);
  std::string to_string() const;

  double eval(const Point& x, int dim) const;
  /// Radius of a ball around the origin containing the support; infinity if
  /// the function is not compactly supported.
  double support_radius(int dim) const;

  static AnalyticSpec gaussian(std::vector<double> c, double a);
  static AnalyticSpec bump(std::vector<double> c, double R);
  static AnalyticSpec shell(std::vector<double> c, double r0, double w);
  static AnalyticSpec sum(std::vector<AnalyticSpec> parts);
  static AnalyticSpec scaled(double k, AnalyticSpec d);
};

/// Samples the descriptor on the grid and attaches a decay certificate
/// derived from the closed form. Throws TruncationError if the function is
/// not negligible (1e-12 relative) at the box boundary.
Field sample_analytic(const GridSpec& grid, const AnalyticSpec& spec);

}  // namespace fraclab
