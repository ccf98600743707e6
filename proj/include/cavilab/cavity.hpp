#pragma once

#include <complex>
#include <vector>

#include "cavilab/model.hpp"

namespace cavilab {

/// One point of a complex transmission sweep.
struct TransmissionPoint {
  double omega;               ///< probe angular frequency (rad/s)
  std::complex<double> s21;   ///< normalized transmission
};

/// Carrier operating point of the homodyne readout.
///
/// Phase convention: arg S21(omega_c) = 0, i.e. phases are measured relative
/// to the off-resonance carrier and the IQ rotation puts all cavity-frequency
/// signal into the Q quadrature.
struct ReadoutGeometry {
  double v0;        ///< carrier voltage amplitude off resonance (V)
  double s_min;     ///< normalized on-resonance transmission amplitude
  double detuning;  ///< probe offset from omega_c (rad/s); 0 = on resonance

  ReadoutGeometry(double v0, double s_min, double detuning = 0.0);

  /// Operating point with the probe on resonance and s_min from the cavity.
  static ReadoutGeometry on_resonance(const CavityParams& cavity, double v0);

  /// Carrier amplitude reaching the detector when probing on resonance.
  double carrier_voltage() const { return v0 * s_min; }
};

/// Notch (transmission-past) response of a side-coupled cavity:
/// S21(omega) = 1 - (Q/Q_ext) / (1 + 2 i Q (omega - omega_c)/omega_c).
/// Linear regime only; unity transmission far off resonance.
std::complex<double> transmission(const CavityParams& cavity, double omega);

/// Normalized on-resonance transmission amplitude, 1 - Q/Q_ext in [0, 1].
double s_min(const CavityParams& cavity);

/// Q-quadrature voltage per unit cavity-frequency shift, probe on resonance:
/// dV_Q/d omega_c = (2Q/omega_c) * V0 * (1 - S_min)   [V per rad/s].
double quadrature_responsivity(const ReadoutGeometry& geometry,
                               const CavityParams& cavity);

/// Cavity filtering of a sideband at omega_m: 1 + 4 (omega_m/gamma_c)^2.
/// Tends to 1 deep in the bad-cavity limit.
double sideband_filter_factor(double omega_m, double gamma_c);

/// Uniform transmission sweep over [omega_lo, omega_hi], n >= 2 points.
std::vector<TransmissionPoint> transmission_sweep(const CavityParams& cavity,
                                                  double omega_lo, double omega_hi,
                                                  int n);

}  // namespace cavilab
