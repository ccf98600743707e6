#include "cavilab/readout.hpp"

#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"
#include "cavilab/rng.hpp"

namespace cavilab {

NoiseModel::NoiseModel(double t_n_, double a_tls_, double tls_exponent_,
                       double gain_factor_)
    : t_n(t_n_), a_tls(a_tls_), tls_exponent(tls_exponent_), gain_factor(gain_factor_) {
  if (!(std::isfinite(t_n) && t_n >= 0.0))
    throw std::invalid_argument("NoiseModel: t_n must be >= 0");
  if (!(std::isfinite(a_tls) && a_tls >= 0.0))
    throw std::invalid_argument("NoiseModel: a_tls must be >= 0");
  if (!(tls_exponent > 0.0 && tls_exponent < 2.0))
    throw std::invalid_argument("NoiseModel: tls_exponent must be in (0, 2)");
  if (!(std::isfinite(gain_factor) && gain_factor > 0.0))
    throw std::invalid_argument("NoiseModel: gain_factor must be > 0");
}

double amplifier_phase_floor(double t_n, double power_at_detector) {
  if (!(std::isfinite(t_n) && t_n >= 0.0))
    throw std::domain_error("amplifier_phase_floor: t_n must be >= 0");
  if (!(std::isfinite(power_at_detector) && power_at_detector > 0.0))
    throw std::domain_error("amplifier_phase_floor: detector power must be > 0");
  return constants::k_b * t_n / power_at_detector;
}

double amplifier_quanta(double t_n, double omega_c) {
  return constants::k_b * t_n / (constants::hbar * omega_c);
}

double tls_phase_noise(const NoiseModel& noise, double nu) {
  if (!(std::isfinite(nu) && nu > 0.0))
    throw std::domain_error("tls_phase_noise: nu must be > 0");
  if (noise.a_tls == 0.0) return 0.0;
  return noise.a_tls * std::pow(nu, -noise.tls_exponent);
}

double detector_power(const CavityParams& cavity, const ReadoutGeometry& geometry) {
  return cavity.power_incident * geometry.s_min * geometry.s_min;
}

DetectedSpectrum forward_spectrum(const MechanicalMode& mode, const CavityParams& cavity,
                                  const CouplingModel& coupling,
                                  const ReadoutGeometry& geometry, const NoiseModel& noise,
                                  std::span<const double> grid_hz, std::uint64_t seed,
                                  int averages,
                                  const std::optional<ElectrostaticDrive>& drive) {
  if (grid_hz.size() < 2)
    throw std::invalid_argument("forward_spectrum: grid needs at least two points");
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!(std::isfinite(grid_hz[i]) && grid_hz[i] > 0.0))
      throw std::invalid_argument("forward_spectrum: grid frequencies must be > 0");
    if (i > 0 && !(grid_hz[i] > grid_hz[i - 1]))
      throw std::invalid_argument("forward_spectrum: grid must be strictly increasing");
  }
  if (averages < 0) throw std::invalid_argument("forward_spectrum: averages must be >= 0");

  const double responsivity = quadrature_responsivity(geometry, cavity);
  const double gamma_c = cavity_linewidth(cavity);
  const double v_carrier = geometry.carrier_voltage();
  const double gain2 = noise.gain_factor * noise.gain_factor;

  double phi_amp = 0.0;
  if (noise.t_n > 0.0)
    phi_amp = amplifier_phase_floor(noise.t_n, detector_power(cavity, geometry));

  DetectedSpectrum out{{}, {}, geometry, {}};
  out.frequency_hz.assign(grid_hz.begin(), grid_hz.end());
  out.s_v_q.resize(grid_hz.size());

  Rng rng(seed);
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    const double nu = grid_hz[i];
    const double omega = constants::two_pi * nu;
    const double s_x = thermal_displacement_psd(mode, omega - mode.omega_m);
    const double filter = sideband_filter_factor(omega, gamma_c);
    const double signal =
        gain2 * responsivity * responsivity * coupling.g * coupling.g * s_x / filter;
    const double floor =
        v_carrier * v_carrier * (phi_amp + (noise.a_tls > 0.0 ? tls_phase_noise(noise, nu) : 0.0));
    double value = signal + floor;
    if (averages > 0) {
      double deviate = 0.0;
      for (int a = 0; a < averages; ++a) deviate += rng.exponential();
      value *= deviate / averages;
    }
    out.s_v_q[i] = value;
  }

  // A coherent drive tone lands in the single bin containing its frequency;
  // the tone itself does not fluctuate with the noise statistics.
  if (drive) {
    const double nu_d = drive->spec.omega_drive / constants::two_pi;
    if (nu_d >= grid_hz.front() && nu_d <= grid_hz.back()) {
      std::size_t bin = 0;
      double best = std::abs(grid_hz[0] - nu_d);
      for (std::size_t i = 1; i < grid_hz.size(); ++i) {
        const double d = std::abs(grid_hz[i] - nu_d);
        if (d < best) {
          best = d;
          bin = i;
        }
      }
      const double df = bin + 1 < grid_hz.size() ? grid_hz[bin + 1] - grid_hz[bin]
                                                 : grid_hz[bin] - grid_hz[bin - 1];
      const double force = electrostatic_force(drive->spec, drive->dcd_dx);
      const auto response = driven_response(mode, force, drive->spec.omega_drive);
      const double filter = sideband_filter_factor(drive->spec.omega_drive, gamma_c);
      const double tone_sx = response.amplitude * response.amplitude / 2.0 / df;
      out.s_v_q[bin] +=
          gain2 * responsivity * responsivity * coupling.g * coupling.g * tone_sx / filter;
    }
  }

  out.metadata["seed"] = std::to_string(seed);
  out.metadata["averages"] = std::to_string(averages);
  out.metadata["probe_detuning_rad_s"] = std::to_string(geometry.detuning);
  return out;
}

SpectrumSeries volts_to_cavity_freq_psd(const DetectedSpectrum& spectrum,
                                        const CavityParams& cavity,
                                        const ReadoutGeometry& geometry) {
  if (!(geometry.s_min < 1.0))
    throw std::domain_error("volts_to_cavity_freq_psd: uncoupled cavity (s_min = 1)");
  if (!(geometry.v0 > 0.0))
    throw std::domain_error("volts_to_cavity_freq_psd: v0 must be > 0");

  const double q = total_quality_factor(cavity.q_int, cavity.q_ext);
  const double gamma_c = cavity_linewidth(cavity);
  const double denom = (2.0 * q) * (2.0 * q) * geometry.v0 * geometry.v0 *
                       (1.0 - geometry.s_min) * (1.0 - geometry.s_min);

  SpectrumSeries out;
  out.units = "(rad/s)^2/Hz";
  out.metadata = spectrum.metadata;
  out.frequency_hz = spectrum.frequency_hz;
  out.values.resize(spectrum.s_v_q.size());
  for (std::size_t i = 0; i < spectrum.s_v_q.size(); ++i) {
    const double omega = constants::two_pi * spectrum.frequency_hz[i];
    const double factor =
        cavity.omega_c * cavity.omega_c * sideband_filter_factor(omega, gamma_c) / denom;
    out.values[i] = factor * spectrum.s_v_q[i];
  }
  return out;
}

}  // namespace cavilab
