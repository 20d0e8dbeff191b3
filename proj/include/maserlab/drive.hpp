#pragma once

#include <cmath>

#include "maserlab/constants.hpp"
#include "maserlab/error.hpp"

namespace maserlab {

/// Monochromatic input on the external port.
struct DriveSpec {
  double P_in = 0.0;     ///< W
  double omega_in = 0.0; ///< rad/s

  /// |s_in|^2 = P_in / (hbar omega_in), photons/s.
  double photon_flux() const { return P_in / (constants::hbar * omega_in); }
};

inline void validate(const DriveSpec& d) {
  detail::require(d.P_in >= 0.0 && std::isfinite(d.P_in), "P_in must be finite and >= 0");
  detail::require_positive(d.omega_in, "omega_in");
}

} // namespace maserlab
