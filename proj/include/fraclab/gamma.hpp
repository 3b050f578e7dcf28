#pragma once

#include "fraclab/grid.hpp"

namespace fraclab {

/// Principal branch of log Gamma(z): real part log|Gamma(z)|, imaginary part
/// arg Gamma(z) in (-pi, pi]. Lanczos approximation with reflection for
/// Re z < 1/2. Throws PoleError at nonpositive integers.
cplx log_gamma(cplx z);

/// Gamma(z) = exp(log_gamma(z)).
cplx gamma_fn(cplx z);

/// Residue of Gamma at -ell: (-1)^ell / ell!.
double gamma_residue(int ell);

}  // namespace fraclab
