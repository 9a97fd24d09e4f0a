#pragma once

#include "aerostat/types.hpp"

namespace aerostat {

/// Isotropic linear-elastic film. Thin polyethylene balloon film commonly
/// measures nu > 0.5 in cylinder tests; anything in (0,1) is accepted.
struct MaterialProps {
  double thickness = 0.0;  // t [m]
  double youngs = 0.0;     // E [Pa]
  double poisson = 0.0;    // nu [-]

  /// Membrane stiffness tau = tE/(1-nu^2) [N/m].
  double tau() const { return thickness * youngs / (1.0 - poisson * poisson); }

  /// tE [N/m]; uniaxial stiffness of the wrinkled branch.
  double te() const { return thickness * youngs; }

  double lame_lambda() const {
    return youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  }
  double lame_mu() const { return youngs / (2.0 * (1.0 + poisson)); }

  void validate() const {
    if (!(thickness > 0.0)) throw ConfigError("material.thickness must be > 0");
    if (!(youngs > 0.0)) throw ConfigError("material.youngs_modulus must be > 0");
    if (!(poisson > 0.0 && poisson < 1.0))
      throw ConfigError("material.poisson must lie in (0, 1)");
  }
};

}  // namespace aerostat
