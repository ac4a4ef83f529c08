#pragma once

#include <numbers>

// Internal unit system: angular frequency in rad/us, time in us.
// Interfaces that speak MHz (ordinary frequency, f = omega / 2pi) or ns
// convert through these helpers and nowhere else.
namespace kpo::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency in MHz -> angular frequency in rad/us.
constexpr double from_mhz(double f_mhz) { return two_pi * f_mhz; }
/// Angular frequency in rad/us -> ordinary frequency in MHz.
constexpr double to_mhz(double omega) { return omega / two_pi; }

constexpr double from_ns(double t_ns) { return t_ns * 1e-3; }
constexpr double to_ns(double t_us) { return t_us * 1e3; }

}  // namespace kpo::units
