#pragma once

#include <numbers>

namespace cavilab::constants {

// CODATA / exact-SI values. Everything in this library is strict SI with
// angular frequencies in rad/s; unit prefixes exist only at interfaces.
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_b = 1.380649e-23;      // J/K

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace cavilab::constants
