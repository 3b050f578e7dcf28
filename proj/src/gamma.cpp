#include "fraclab/gamma.hpp"

#include <cmath>
#include <numbers>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

// Godfrey's coefficients for g = 607/128.
constexpr double kG = 607.0 / 128.0;
constexpr double kCoef[15] = {0.99999999999999709182,      57.156235665862923517,     -59.597960355475491248,
                              14.136097974741747174,       -0.49191381609762019978,   .33994649984811888699e-4,
                              .46523628927048575665e-4,    -.98374475304879564677e-4, .15808870322491248884e-3,
                              -.21026444172410488319e-3,   .21743961811521264320e-3,  -.16431810653676389022e-3,
                              .84418223983852743293e-4,    -.26190838401581408670e-4, .36899182659531622704e-5};

cplx lanczos_log(cplx z) {
  // log Gamma(z) for Re z >= 1/2.
  z -= 1.0;
  cplx a = kCoef[0];
  for (int k = 1; k < 15; ++k) a += kCoef[k] / (z + static_cast<double>(k));
  cplx t = z + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

cplx log_sin_pi(cplx z) {
  // log sin(pi z), stable for large |Im z|.
  const double y = z.imag();
  if (std::abs(y) < 30.0) return std::log(std::sin(std::numbers::pi * z));
  // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i; factor out the dominant exponential.
  const cplx ipz = cplx(0.0, std::numbers::pi) * z;
  if (y > 0) return -ipz + std::log(cplx(0.0, 0.5)) + std::log(1.0 - std::exp(2.0 * ipz));
  return ipz + std::log(cplx(0.0, -0.5)) + std::log(1.0 - std::exp(-2.0 * ipz));
}

double wrap(double a) {
  const double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

}  // namespace

cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw PoleError("Gamma has a pole at z = " + std::to_string(z.real()));
  cplx v;
  if (z.real() < 0.5)
    v = std::log(std::numbers::pi) - log_sin_pi(z) - lanczos_log(1.0 - z);
  else
    v = lanczos_log(z);
  return {v.real(), wrap(v.imag())};
}

cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

double gamma_residue(int ell) {
  if (ell < 0) throw DomainError("residue index must be nonnegative");
  double f = 1.0;
  for (int k = 2; k <= ell; ++k) f *= k;
  return (ell % 2 == 0 ? 1.0 : -1.0) / f;
}

}  // namespace fraclab
