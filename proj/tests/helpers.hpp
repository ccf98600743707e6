#pragma once

#include <cmath>

#include "cavilab/cavity.hpp"
#include "cavilab/constants.hpp"
#include "cavilab/model.hpp"

namespace testutil {

inline constexpr double two_pi = cavilab::constants::two_pi;

// 5 GHz notch cavity on a 70 ohm line, probed at 68 pW.
inline cavilab::CavityParams notch_cavity(double power_w = 68e-12) {
  return {two_pi * 5e9, 38000.0, 14000.0, 70.0, power_w};
}

// 240 kHz, 2 pg, Q = 2300 beam.
inline cavilab::MechanicalMode beam_240khz(double temperature_k = 0.1) {
  return {two_pi * 240e3, 2e-15, 2300.0, temperature_k};
}

// Tensile-stressed 2.3 MHz, Q = 120000 beam.
inline cavilab::MechanicalMode beam_2p3mhz(double temperature_k = 0.1) {
  return {two_pi * 2.3e6, 2e-15, 120000.0, temperature_k};
}

inline double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

}  // namespace testutil
