#pragma once

#include <limits>

namespace cavilab {

/// Sentinel for a cavity with negligible internal loss (Q_int -> infinity).
inline constexpr double lossless_q = std::numeric_limits<double>::infinity();

/// Microwave resonator parameters. Immutable value type; all fields SI.
struct CavityParams {
  double omega_c;         ///< resonance angular frequency (rad/s)
  double q_int;           ///< internal quality factor (lossless_q allowed)
  double q_ext;           ///< external (coupling) quality factor
  double z_line;          ///< transmission-line impedance (ohm)
  double power_incident;  ///< probe power at the device (W)

  CavityParams(double omega_c, double q_int, double q_ext, double z_line,
               double power_incident);
};

/// Mechanical oscillator parameters. Immutable value type; all fields SI.
struct MechanicalMode {
  double omega_m;           ///< resonance angular frequency (rad/s)
  double mass;              ///< effective mass (kg)
  double q_m;               ///< mechanical quality factor
  double temperature_bath;  ///< bath temperature (K)

  MechanicalMode(double omega_m, double mass, double q_m, double temperature_bath);

  /// Mechanical linewidth gamma_m = omega_m / Q_m (rad/s).
  double gamma_m() const { return omega_m / q_m; }

  /// Zero-point displacement scale sqrt(hbar / (2 m omega_m)) (m).
  double x_zp() const;
};

/// Beam-to-cavity transduction: capacitance gradients and the cavity pull g.
///
/// g is stored as a positive magnitude |d omega_c / dx|; physically the cavity
/// red-shifts as the beam approaches the ground plane, but only g^2 enters any
/// formula here, so the sign is a documented convention rather than state.
struct CouplingModel {
  double dcb_dx;  ///< cavity-capacitance gradient (F/m)
  double dcd_dx;  ///< drive-capacitance gradient (F/m)
  double g;       ///< cavity pull (rad/s per m), non-negative

  CouplingModel(double dcb_dx, double dcd_dx, double g);

  /// Builds the model with g derived from the capacitance gradient.
  static CouplingModel from_geometry(double dcb_dx, double dcd_dx,
                                     const CavityParams& cavity);
};

/// Harmonic combination Q = (1/q_int + 1/q_ext)^-1. Accepts lossless_q on
/// either argument; throws std::domain_error on non-positive input.
double total_quality_factor(double q_int, double q_ext);

/// Cavity bandwidth gamma_c = omega_c / Q (rad/s).
double cavity_linewidth(const CavityParams& cavity);

/// Spring constant k = m omega_m^2 (N/m).
double spring_constant(const MechanicalMode& mode);

/// Cavity pull from the capacitance gradient for a shorted quarter-wave line:
/// |d omega_c / dx| = omega_c^2 * (dC_b/dx) * 4 Z_line / (2 pi).
double coupling_from_geometry(double dcb_dx, const CavityParams& cavity);

}  // namespace cavilab
