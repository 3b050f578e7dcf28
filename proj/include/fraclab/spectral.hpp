#pragma once

#include <functional>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Angular frequencies (pi/L) * {0, 1, ..., M/2-1, -M/2, ..., -1} in FFT order.
std::vector<double> frequencies(const GridSpec& g);

/// Unnormalised forward transform and normalised inverse, via FFTW.
std::vector<cplx> fft_forward(const GridSpec& g, const std::vector<cplx>& values);
std::vector<cplx> fft_inverse(const GridSpec& g, const std::vector<cplx>& coeffs);

using Symbol = std::function<cplx(const Point& xi)>;

/// F^{-1}[ sigma(xi) F u ] on the periodic box. Throws DomainError naming the
/// first frequency where sigma is not finite.
Field fourier_multiplier(const Field& u, const Symbol& sigma);
/// Fast path for symbols depending on |xi|^2 only.
Field radial_multiplier(const Field& u, const std::function<cplx(double xi2)>& sigma);

/// (-Delta)^s with |xi|^{2s} set to 0 at xi = 0 for s > 0.
Field frac_lap_fourier(const Field& u, double s);
/// Delta^m, i.e. multiplier (-|xi|^2)^m.
Field laplacian_power(const Field& u, int m);

/// u * psi_eps with the standard bump mollifier, applied spectrally. The
/// discrete kernel is normalised to unit mass. Requires eps < eps0.
Field mollify(const Field& u, double eps, double eps0);

/// Evaluates the trigonometric interpolant of a field at arbitrary points.
class FourierEvaluator {
 public:
  explicit FourierEvaluator(const Field& u);
  cplx operator()(const Point& x) const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  std::vector<double> re_, im_;  // coefficients / M^n, FFT order
  std::vector<double> freq_;
};

/// Same interpolant as FourierEvaluator, evaluated by Gaussian gridding on a
/// 2x oversampled grid (spreading width 12 per side). Costs O((24)^n) per
/// point after one FFT; agrees with direct summation to about 1e-12.
class GriddingEvaluator {
 public:
  explicit GriddingEvaluator(const Field& u);
  cplx operator()(const Point& x) const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  int fine_ = 0;
  double tau_ = 0.0;
  std::vector<cplx> values_;  // deconvolved interpolant on the fine grid
};

}  // namespace fraclab
