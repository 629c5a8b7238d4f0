#pragma once

#include <cmath>
#include <numbers>

namespace fss {

// Physical constants, fixed so results are bit-stable across builds.
inline constexpr double speed_of_light = 299792458.0;                     // m/s
inline constexpr double mu0 = 4.0 * std::numbers::pi * 1e-7;              // H/m
inline constexpr double eps0 = 1.0 / (mu0 * speed_of_light * speed_of_light);  // F/m

// Plane-wave impedance of vacuum; reference impedance of the Floquet ports.
inline const double eta0 = std::sqrt(mu0 / eps0);  // ohm

}  // namespace fss
