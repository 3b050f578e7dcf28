#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fraclab/analytic.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/spectral.hpp"

namespace fixtures {

using namespace fraclab;

inline double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_sup(const Field& a, const Field& b) {
  double s = std::max(a.max_abs(), b.max_abs());
  return s == 0.0 ? 0.0 : sup_diff(a, b) / s;
}

inline double rel(cplx a, cplx b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Random smooth field: random coefficients on |k| <= kmax, zero elsewhere.
inline Field random_bandlimited(const GridSpec& g, unsigned seed, int kmax = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int M = g.points_per_axis;
  std::vector<cplx> c(g.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto idx = g.index(i);
    bool low = true;
    for (int d = 0; d < g.dim; ++d) {
      int k = idx[d] < M / 2 ? idx[d] : idx[d] - M;
      if (std::abs(k) > kmax) low = false;
    }
    if (low) c[i] = {nd(rng), nd(rng)};
  }
  return Field(g, fft_inverse(g, c));
}

inline Point origin() { return Point{0.0, 0.0, 0.0}; }

/// 1-D field odd about each of the grid nodes centre + k*stride for k in
/// {-2..2}, built by alternating projections v <- (v - R_c v)/2 from a
/// Gaussian seed at x = 3. Only the zero function is odd about two distinct
/// centres and decays, so the sweeps drive v to round-off.
inline Field odd_reflection_1d(const GridSpec& g, int stride = 4, double stop = 1e-13) {
  const int M = g.points_per_axis;
  std::vector<double> v(M), seed(M);
  for (int i = 0; i < M; ++i) {
    const double x = g.coord(i);
    seed[i] = std::abs(x - 3.0) > 2.5 ? 0.0 : std::exp(-(x - 3.0) * (x - 3.0) / (2 * 0.09));
  }
  v = seed;
  const int c0 = M / 2;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (int k = -2; k <= 2; ++k) {
      const int c = c0 + k * stride;
      std::vector<double> r(M, 0.0);
      for (int i = 0; i < M; ++i) {
        const int j = 2 * c - i;
        if (j >= 0 && j < M) r[i] = v[j];
      }
      for (int i = 0; i < M; ++i) v[i] = 0.5 * (v[i] - r[i]);
    }
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    if (m < stop) break;
  }
  std::vector<cplx> out(v.begin(), v.end());
  DecayCertificate zero_tail;
  zero_tail.numerically_zero_tail = true;
  zero_tail.C = 1.0;
  return Field(g, out, zero_tail);
}

}  // namespace fixtures
