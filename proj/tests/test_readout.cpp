#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cavilab/constants.hpp"
#include "cavilab/readout.hpp"
#include "helpers.hpp"

using namespace cavilab;
using doctest::Approx;
using testutil::two_pi;

namespace {

std::vector<double> beam_grid(const MechanicalMode& mode, double half_widths = 10.0,
                              int n = 401) {
  const double fwhm_hz = mode.gamma_m() / two_pi;
  const double f_m = mode.omega_m / two_pi;
  std::vector<double> grid;
  for (int i = 0; i < n; ++i)
    grid.push_back(f_m - half_widths * fwhm_hz + 2.0 * half_widths * fwhm_hz * i / (n - 1));
  return grid;
}

}  // namespace

TEST_CASE("amplifier phase floor") {
  CHECK(amplifier_phase_floor(7.5, 68e-12) == Approx(1.5227746323529412e-12).epsilon(1e-12));
  CHECK(std::sqrt(amplifier_phase_floor(7.5, 68e-12)) == Approx(1.234e-6).epsilon(1e-3));
  CHECK(amplifier_phase_floor(0.0, 68e-12) == 0.0);
  CHECK(amplifier_phase_floor(7.5, 34e-12) ==
        Approx(2.0 * amplifier_phase_floor(7.5, 68e-12)).epsilon(1e-12));
  CHECK_THROWS_AS(amplifier_phase_floor(7.5, 0.0), std::domain_error);
}

TEST_CASE("amplifier quanta") {
  CHECK(amplifier_quanta(7.5, two_pi * 5e9) == Approx(31.254928704141854).epsilon(1e-9));
  CHECK(testutil::rel_err(amplifier_quanta(7.5, two_pi * 5e9), 30.0) < 0.05);
}

TEST_CASE("TLS phase noise") {
  const NoiseModel model(0.0, 1e-11);
  CHECK(tls_phase_noise(model, 240e3) == Approx(2.0412414523193147e-14).epsilon(1e-9));
  CHECK(tls_phase_noise(model, 4.0 * 240e3) ==
        Approx(tls_phase_noise(model, 240e3) / 2.0).epsilon(1e-12));
  const NoiseModel off(0.0, 0.0);
  CHECK(tls_phase_noise(off, 123.0) == 0.0);
  CHECK_THROWS_AS(tls_phase_noise(model, 0.0), std::domain_error);
  CHECK_THROWS_AS(NoiseModel(0.0, 1e-11, 2.5), std::invalid_argument);
}

TEST_CASE("TLS/amplifier crossover frequency") {
  const auto cavity = testutil::notch_cavity();
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(7.5, 3e-12);
  const double p_det = detector_power(cavity, geometry);
  const double nu_star = std::pow(noise.a_tls * p_det / (constants::k_b * noise.t_n), 2.0);
  CHECK(tls_phase_noise(noise, nu_star) ==
        Approx(amplifier_phase_floor(noise.t_n, p_det)).epsilon(1e-9));
  // below the crossover TLS dominates, above it the white floor does
  CHECK(tls_phase_noise(noise, nu_star / 4.0) >
        2.0 * amplifier_phase_floor(noise.t_n, p_det) * 0.99);
  CHECK(tls_phase_noise(noise, nu_star * 4.0) <
        0.51 * amplifier_phase_floor(noise.t_n, p_det));
}

TEST_CASE("detected background is flat above the TLS crossover and nu^-1/2 below") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const CouplingModel no_coupling(0.0, 0.0, 0.0);  // background only
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(7.5, 3e-12);
  const double p_det = detector_power(cavity, geometry);
  const double nu_star = std::pow(noise.a_tls * p_det / (constants::k_b * noise.t_n), 2.0);

  std::vector<double> grid;
  for (double nu = nu_star / 64.0; nu < nu_star * 64.0; nu *= 1.5) grid.push_back(nu);
  const auto spectrum =
      forward_spectrum(mode, cavity, no_coupling, geometry, noise, grid, 1, 0);

  const double v2 = geometry.carrier_voltage() * geometry.carrier_voltage();
  const double floor = v2 * amplifier_phase_floor(noise.t_n, p_det);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i] > 16.0 * nu_star) {
      CHECK(spectrum.s_v_q[i] == Approx(floor).epsilon(0.05));  // white floor
    } else if (grid[i + 1] < nu_star / 16.0) {
      const double excess_a = spectrum.s_v_q[i] - floor;
      const double excess_b = spectrum.s_v_q[i + 1] - floor;
      CHECK(excess_a * std::sqrt(grid[i]) ==
            Approx(excess_b * std::sqrt(grid[i + 1])).epsilon(1e-9));
      CHECK(spectrum.s_v_q[i] > spectrum.s_v_q[i + 1]);
    }
  }
}

TEST_CASE("forward spectrum composes the already-tested pieces") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(7.5, 0.0);
  const auto grid = beam_grid(mode);

  const auto spectrum =
      forward_spectrum(mode, cavity, coupling, geometry, noise, grid, 1, 0);

  const double responsivity = quadrature_responsivity(geometry, cavity);
  const double gamma_c = cavity_linewidth(cavity);
  const double v_car = geometry.carrier_voltage();
  const double floor =
      v_car * v_car * amplifier_phase_floor(noise.t_n, detector_power(cavity, geometry));
  for (std::size_t i = 0; i < grid.size(); i += 40) {
    const double omega = two_pi * grid[i];
    const double expected = responsivity * responsivity * coupling.g * coupling.g *
                                thermal_displacement_psd(mode, omega - mode.omega_m) /
                                sideband_filter_factor(omega, gamma_c) +
                            floor;
    CHECK(spectrum.s_v_q[i] == Approx(expected).epsilon(1e-12));
  }

  // peak-to-floor ratio from the compositional oracle
  const std::size_t centre = grid.size() / 2;
  const double peak_expected = responsivity * responsivity * coupling.g * coupling.g *
                               thermal_displacement_psd(mode, two_pi * grid[centre] - mode.omega_m) /
                               sideband_filter_factor(two_pi * grid[centre], gamma_c);
  CHECK((spectrum.s_v_q[centre] - floor) / floor ==
        Approx(peak_expected / floor).epsilon(1e-9));
  CHECK(peak_expected / floor > 5.0);  // the thermal peak clears the floor at 68 pW
}

TEST_CASE("zero coupling gives a flat noise-only spectrum") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const CouplingModel no_coupling(0.0, 0.0, 0.0);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(7.5, 0.0);
  const auto grid = beam_grid(mode);
  const auto spectrum =
      forward_spectrum(mode, cavity, no_coupling, geometry, noise, grid, 1, 0);
  for (const double v : spectrum.s_v_q) CHECK(v == Approx(spectrum.s_v_q[0]).epsilon(1e-12));
}

TEST_CASE("noiseless forward then inverse recovers g^2 S_x exactly") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel quiet(0.0, 0.0);
  const auto grid = beam_grid(mode, 12.0, 1001);

  const auto detected = forward_spectrum(mode, cavity, coupling, geometry, quiet, grid, 9, 0);
  const auto recovered = volts_to_cavity_freq_psd(detected, cavity, geometry);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = coupling.g * coupling.g *
                            thermal_displacement_psd(mode, two_pi * grid[i] - mode.omega_m);
    CHECK(testutil::rel_err(recovered.values[i], expected) < 1e-9);
  }
}

TEST_CASE("conversion factor matches the responsivity at low frequency") {
  const auto cavity = testutil::notch_cavity();
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  DetectedSpectrum probe{{10.0, 20.0}, {1.0, 1.0}, geometry, {}};
  const auto converted = volts_to_cavity_freq_psd(probe, cavity, geometry);
  CHECK(converted.values[0] == Approx(4.4143083945e12).epsilon(1e-6));

  // the filter term doubles the conversion where 4 (2 pi nu / gamma_c)^2 = 1
  const double gamma_c = cavity_linewidth(cavity);
  const double nu_half = gamma_c / 2.0 / two_pi;
  DetectedSpectrum two_bins{{10.0, nu_half}, {1.0, 1.0}, geometry, {}};
  const auto pair = volts_to_cavity_freq_psd(two_bins, cavity, geometry);
  CHECK(pair.values[1] == Approx(2.0 * 4.4143083945e12).epsilon(1e-6));
}

TEST_CASE("uncoupled cavity cannot be inverted") {
  const auto cavity = testutil::notch_cavity();
  const ReadoutGeometry uncoupled(1.0, 1.0, 0.0);
  DetectedSpectrum spectrum{{10.0, 20.0}, {1.0, 1.0}, uncoupled, {}};
  CHECK_THROWS_AS(volts_to_cavity_freq_psd(spectrum, cavity, uncoupled), std::domain_error);
}

TEST_CASE("gain factor scales the signal and leaves phase floors untouched") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const auto grid = beam_grid(mode);

  const NoiseModel reference(7.5, 1e-12);
  const NoiseModel distorted(7.5, 1e-12, 0.5, 0.7);
  const auto s_ref = forward_spectrum(mode, cavity, coupling, geometry, reference, grid, 1, 0);
  const auto s_gain = forward_spectrum(mode, cavity, coupling, geometry, distorted, grid, 1, 0);

  const double v_car = geometry.carrier_voltage();
  for (std::size_t i = 0; i < grid.size(); i += 25) {
    const double floor =
        v_car * v_car *
        (amplifier_phase_floor(7.5, detector_power(cavity, geometry)) +
         tls_phase_noise(reference, grid[i]));
    const double signal = s_ref.s_v_q[i] - floor;
    CHECK(s_gain.s_v_q[i] == Approx(0.7 * 0.7 * signal + floor).epsilon(1e-12));
  }
}

TEST_CASE("statistical mode: mean of many spectra converges to the expectation") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.1);
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(7.5, 0.0);
  const auto grid = beam_grid(mode, 6.0, 32);

  const auto noiseless = forward_spectrum(mode, cavity, coupling, geometry, noise, grid, 0, 0);

  auto rms_deviation = [&](int n_spectra) {
    std::vector<double> mean(grid.size(), 0.0);
    for (int k = 0; k < n_spectra; ++k) {
      const auto s = forward_spectrum(mode, cavity, coupling, geometry, noise, grid,
                                      1000 + static_cast<std::uint64_t>(k), 1);
      for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += s.s_v_q[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double rel = mean[i] / n_spectra / noiseless.s_v_q[i] - 1.0;
      acc += rel * rel;
    }
    return std::sqrt(acc / grid.size());
  };

  const double dev100 = rms_deviation(100);
  CHECK(dev100 < 0.15);
  CHECK(dev100 > 0.05);  // consistent with the 1/sqrt(N) prediction of ~0.10
  const double dev25 = rms_deviation(25);
  CHECK(dev25 > dev100);

  // determinism: the same seed reproduces the same spectrum bit for bit
  const auto s1 = forward_spectrum(mode, cavity, coupling, geometry, noise, grid, 5, 1);
  const auto s2 = forward_spectrum(mode, cavity, coupling, geometry, noise, grid, 5, 1);
  CHECK(s1.s_v_q == s2.s_v_q);
}

TEST_CASE("forward spectrum validates its grid") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz();
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 0.0, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel noise(0.0, 0.0);
  const std::vector<double> decreasing = {100.0, 50.0};
  CHECK_THROWS_AS(
      forward_spectrum(mode, cavity, coupling, geometry, noise, decreasing, 1, 0),
      std::invalid_argument);
  const std::vector<double> negative = {-1.0, 50.0};
  CHECK_THROWS_AS(forward_spectrum(mode, cavity, coupling, geometry, noise, negative, 1, 0),
                  std::invalid_argument);
}

TEST_CASE("drive tone lands in the right bin with the right power") {
  const auto cavity = testutil::notch_cavity();
  const auto mode = testutil::beam_240khz(0.0);  // only the tone, no thermal peak
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel quiet(0.0, 0.0);
  const auto grid = beam_grid(mode, 10.0, 401);
  const ElectrostaticDrive drive{DriveSpec(1.0, 10e-3, mode.omega_m), coupling.dcd_dx};

  const auto spectrum =
      forward_spectrum(mode, cavity, coupling, geometry, quiet, grid, 1, 0, drive);
  std::size_t max_bin = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (spectrum.s_v_q[i] > spectrum.s_v_q[max_bin]) max_bin = i;
  CHECK(std::abs(grid[max_bin] - mode.omega_m / two_pi) < grid[1] - grid[0]);

  const double df = grid[1] - grid[0];
  const double amp = driven_response(mode, electrostatic_force(drive.spec, drive.dcd_dx),
                                     mode.omega_m)
                         .amplitude;
  const double responsivity = quadrature_responsivity(geometry, cavity);
  const double expected = responsivity * responsivity * coupling.g * coupling.g *
                          (amp * amp / 2.0 / df) /
                          sideband_filter_factor(mode.omega_m, cavity_linewidth(cavity));
  CHECK(spectrum.s_v_q[max_bin] == Approx(expected).epsilon(1e-9));
}
