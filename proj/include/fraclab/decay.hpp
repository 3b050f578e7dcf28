#pragma once

#include <string>

#include "fraclab/grid.hpp"

namespace fraclab {

struct DecayFit {
  bool success = false;
  DecayCertificate certificate;
  double rms_misfit = 0.0;
  int shells_used = 0;
  std::string reason;
};

/// Fits log max|u| on shells |x| in [L/2, L) against log C - rho |x|^gamma.
/// Success needs gamma > 1.05, rho > 0, RMS misfit < 0.5 and at least three
/// usable shells. If every shell is below machine precision relative to
/// max|u| a "numerically zero tail" certificate is returned.
DecayFit fit_super_exp_decay(const Field& u);

}  // namespace fraclab
