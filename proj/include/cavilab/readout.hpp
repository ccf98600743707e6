#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavilab/cavity.hpp"
#include "cavilab/mechanics.hpp"
#include "cavilab/model.hpp"
#include "cavilab/spectral.hpp"

namespace cavilab {

/// Detection-chain noise description.
///
/// gain_factor is an unknown multiplicative responsivity perturbation (e.g.
/// a power-dependent distortion of the cavity response); it scales the
/// transduced signal but not the phase-referred noise floors, which is
/// exactly the asymmetry the drive-tone gain calibration exploits.
struct NoiseModel {
  double t_n = 0.0;           ///< amplifier noise temperature (K)
  double a_tls = 0.0;         ///< substrate phase noise at 1 Hz (rad^2/Hz at 1 Hz)
  double tls_exponent = 0.5;  ///< S_phi ~ nu^-tls_exponent
  double gain_factor = 1.0;

  NoiseModel() = default;
  NoiseModel(double t_n, double a_tls, double tls_exponent = 0.5,
             double gain_factor = 1.0);
};

/// Q-quadrature voltage PSD at the detector, with the carrier operating point
/// it was taken at.
struct DetectedSpectrum {
  std::vector<double> frequency_hz;  ///< strictly increasing
  std::vector<double> s_v_q;         ///< V^2/Hz, non-negative
  ReadoutGeometry carrier;
  std::map<std::string, std::string> metadata;
};

/// White amplifier phase-noise floor k_b t_n / power_at_detector (rad^2/Hz).
/// Throws std::domain_error when the carrier power is not positive.
double amplifier_phase_floor(double t_n, double power_at_detector);

/// Amplifier noise quanta k_b t_n / (hbar omega_c).
double amplifier_quanta(double t_n, double omega_c);

/// Substrate two-level-system phase noise a_tls * nu^-tls_exponent (rad^2/Hz).
double tls_phase_noise(const NoiseModel& noise, double nu);

/// Carrier power reaching the detector with the probe on resonance:
/// power_incident * s_min^2.
double detector_power(const CavityParams& cavity, const ReadoutGeometry& geometry);

/// Predicted Q-quadrature voltage PSD over `grid_hz`:
///
///   S_V^Q(nu) = gain^2 R^2 g^2 S_x(nu) / F(nu)
///             + (v0 s_min)^2 [S_phi_amp + S_phi_tls(nu)]  (+ drive tone)
///
/// with R the quadrature responsivity and F(nu) = 1 + 4 (2 pi nu / gamma_c)^2
/// applied bin-wise. `averages` > 0 turns on periodogram statistics: every
/// noise bin is multiplied by the mean of that many unit-mean exponential
/// deviates (deterministic per seed); 0 returns the noiseless expectation.
/// An optional electrostatic drive adds a coherent tone into the bin holding
/// the drive frequency.
DetectedSpectrum forward_spectrum(const MechanicalMode& mode, const CavityParams& cavity,
                                  const CouplingModel& coupling,
                                  const ReadoutGeometry& geometry, const NoiseModel& noise,
                                  std::span<const double> grid_hz, std::uint64_t seed,
                                  int averages = 0,
                                  const std::optional<ElectrostaticDrive>& drive = {});

/// Inverse conversion, bin-wise:
///   S_omega_c(nu) = omega_c^2 (1 + 4 (2 pi nu/gamma_c)^2)
///                   / ((2Q)^2 v0^2 (1 - s_min)^2) * S_V^Q(nu).
/// Throws std::domain_error for an uncoupled cavity (s_min = 1).
SpectrumSeries volts_to_cavity_freq_psd(const DetectedSpectrum& spectrum,
                                        const CavityParams& cavity,
                                        const ReadoutGeometry& geometry);

}  // namespace cavilab
