// units.hpp: linear <-> angular frequency helpers

#pragma once

#include <numbers>

namespace cqed::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0; // m/s

// nu [MHz] -> omega [rad/s]
constexpr double from_mhz(double nu_mhz) { return two_pi * 1e6 * nu_mhz; }
constexpr double from_ghz(double nu_ghz) { return two_pi * 1e9 * nu_ghz; }
constexpr double to_mhz(double omega) { return omega / (two_pi * 1e6); }
constexpr double to_ghz(double omega) { return omega / (two_pi * 1e9); }

} // namespace cqed::units
