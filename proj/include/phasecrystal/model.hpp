#pragma once

#include <cmath>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal {

/// Physical configuration shared by all simulations. The kick period is not
/// stored: it is tied to the resonance integer by tau = 2*pi/q0 exactly.
struct ModelParams {
  double K = 0.1;      ///< dimensionless kick strength (sign allowed)
  int q0 = 4;          ///< resonance integer, >= 3
  double lambda = 1.0; ///< effective Planck constant, > 0
  double kappa = 0.0;  ///< dissipation rate, >= 0
  double n0 = 0.0;     ///< thermal occupation of the bath, >= 0

  double tau() const { return 2.0 * specfun::pi / q0; }

  void validate() const {
    if (q0 < 3) throw ValidationError("ModelParams: q0 must be >= 3");
    if (!(lambda > 0)) throw ValidationError("ModelParams: lambda must be > 0");
    if (kappa < 0) throw ValidationError("ModelParams: kappa must be >= 0");
    if (n0 < 0) throw ValidationError("ModelParams: n0 must be >= 0");
    if (!std::isfinite(K)) throw ValidationError("ModelParams: K must be finite");
  }
};

/// Rotating-frame phase-space point.
struct PhasePoint {
  double X = 0.0;
  double P = 0.0;
};

}  // namespace phasecrystal
