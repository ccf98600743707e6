#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cavilab/cavity.hpp"
#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"
#include "cavilab/mechanics.hpp"
#include "cavilab/model.hpp"
#include "cavilab/projection.hpp"
#include "cavilab/readout.hpp"
#include "cavilab/runner.hpp"
#include "cavilab/scenario.hpp"
#include "cavilab/spectral.hpp"

namespace py = pybind11;
using namespace cavilab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Microwave-cavity displacement detection of a nanomechanical beam: "
            "device model, thermal/driven dynamics, detection chain, spectral "
            "analysis and quantum-limit projections.";

  m.attr("hbar") = constants::hbar;
  m.attr("k_b") = constants::k_b;
  m.attr("lossless_q") = lossless_q;
#ifdef CAVILAB_VERSION
  m.attr("__version__") = CAVILAB_VERSION;
#endif

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<CavityParams>(m, "CavityParams")
      .def(py::init<double, double, double, double, double>(), py::arg("omega_c"),
           py::arg("q_int"), py::arg("q_ext"), py::arg("z_line"), py::arg("power_incident"))
      .def_readonly("omega_c", &CavityParams::omega_c)
      .def_readonly("q_int", &CavityParams::q_int)
      .def_readonly("q_ext", &CavityParams::q_ext)
      .def_readonly("z_line", &CavityParams::z_line)
      .def_readonly("power_incident", &CavityParams::power_incident);

  py::class_<MechanicalMode>(m, "MechanicalMode")
      .def(py::init<double, double, double, double>(), py::arg("omega_m"), py::arg("mass"),
           py::arg("q_m"), py::arg("temperature_bath"))
      .def_readonly("omega_m", &MechanicalMode::omega_m)
      .def_readonly("mass", &MechanicalMode::mass)
      .def_readonly("q_m", &MechanicalMode::q_m)
      .def_readonly("temperature_bath", &MechanicalMode::temperature_bath)
      .def("gamma_m", &MechanicalMode::gamma_m)
      .def("x_zp", &MechanicalMode::x_zp);

  py::class_<CouplingModel>(m, "CouplingModel")
      .def(py::init<double, double, double>(), py::arg("dcb_dx"), py::arg("dcd_dx"),
           py::arg("g"))
      .def_static("from_geometry", &CouplingModel::from_geometry, py::arg("dcb_dx"),
                  py::arg("dcd_dx"), py::arg("cavity"))
      .def_readonly("dcb_dx", &CouplingModel::dcb_dx)
      .def_readonly("dcd_dx", &CouplingModel::dcd_dx)
      .def_readonly("g", &CouplingModel::g);

  py::class_<ReadoutGeometry>(m, "ReadoutGeometry")
      .def(py::init<double, double, double>(), py::arg("v0"), py::arg("s_min"),
           py::arg("detuning") = 0.0)
      .def_static("on_resonance", &ReadoutGeometry::on_resonance, py::arg("cavity"),
                  py::arg("v0"))
      .def_readonly("v0", &ReadoutGeometry::v0)
      .def_readonly("s_min", &ReadoutGeometry::s_min)
      .def_readonly("detuning", &ReadoutGeometry::detuning)
      .def("carrier_voltage", &ReadoutGeometry::carrier_voltage);

  py::class_<DriveSpec>(m, "DriveSpec")
      .def(py::init<double, double, double>(), py::arg("v_dc"), py::arg("v_ac"),
           py::arg("omega_drive"))
      .def_readonly("v_dc", &DriveSpec::v_dc)
      .def_readonly("v_ac", &DriveSpec::v_ac)
      .def_readonly("omega_drive", &DriveSpec::omega_drive);

  py::class_<ElectrostaticDrive>(m, "ElectrostaticDrive")
      .def(py::init<DriveSpec, double>(), py::arg("spec"), py::arg("dcd_dx"))
      .def_readonly("spec", &ElectrostaticDrive::spec)
      .def_readonly("dcd_dx", &ElectrostaticDrive::dcd_dx);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<double, double, double, double>(), py::arg("t_n"), py::arg("a_tls"),
           py::arg("tls_exponent") = 0.5, py::arg("gain_factor") = 1.0)
      .def_readonly("t_n", &NoiseModel::t_n)
      .def_readonly("a_tls", &NoiseModel::a_tls)
      .def_readonly("tls_exponent", &NoiseModel::tls_exponent)
      .def_readonly("gain_factor", &NoiseModel::gain_factor);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("dt", &Trajectory::dt)
      .def_readonly("samples", &Trajectory::samples)
      .def_readonly("seed", &Trajectory::seed);

  py::class_<SpectrumSeries>(m, "SpectrumSeries")
      .def(py::init<>())
      .def_readwrite("frequency_hz", &SpectrumSeries::frequency_hz)
      .def_readwrite("values", &SpectrumSeries::values)
      .def_readwrite("units", &SpectrumSeries::units)
      .def_readwrite("metadata", &SpectrumSeries::metadata);

  py::class_<DetectedSpectrum>(m, "DetectedSpectrum")
      .def_readonly("frequency_hz", &DetectedSpectrum::frequency_hz)
      .def_readonly("s_v_q", &DetectedSpectrum::s_v_q)
      .def_readonly("carrier", &DetectedSpectrum::carrier)
      .def_readonly("metadata", &DetectedSpectrum::metadata);

  py::class_<LorentzianFit>(m, "LorentzianFit")
      .def_readonly("center", &LorentzianFit::center)
      .def_readonly("fwhm_gamma", &LorentzianFit::fwhm_gamma)
      .def_readonly("peak", &LorentzianFit::peak)
      .def_readonly("background", &LorentzianFit::background)
      .def_readonly("covariance", &LorentzianFit::covariance)
      .def_readonly("converged", &LorentzianFit::converged)
      .def_readonly("iterations", &LorentzianFit::iterations)
      .def_readonly("chi2", &LorentzianFit::chi2)
      .def("model", &LorentzianFit::model, py::arg("omega"));

  py::class_<TemperaturePoint>(m, "TemperaturePoint")
      .def(py::init<double, double>(), py::arg("temperature"), py::arg("delta_omega_c_sq"))
      .def_readwrite("temperature", &TemperaturePoint::temperature)
      .def_readwrite("delta_omega_c_sq", &TemperaturePoint::delta_omega_c_sq);

  py::class_<TemperatureSweepResult>(m, "TemperatureSweepResult")
      .def_readonly("g_fit", &TemperatureSweepResult::g_fit)
      .def_readonly("t_intercept", &TemperatureSweepResult::t_intercept)
      .def_readonly("fit_window_min_temp", &TemperatureSweepResult::fit_window_min_temp)
      .def_readonly("slope", &TemperatureSweepResult::slope)
      .def_readonly("intercept", &TemperatureSweepResult::intercept)
      .def_readonly("used_indices", &TemperatureSweepResult::used_indices)
      .def_readonly("residuals", &TemperatureSweepResult::residuals);

  py::class_<NoiseBudget>(m, "NoiseBudget")
      .def_readonly("t_im", &NoiseBudget::t_im)
      .def_readonly("t_sat", &NoiseBudget::t_sat)
      .def_readonly("t_ba", &NoiseBudget::t_ba)
      .def_readonly("s_x_im", &NoiseBudget::s_x_im)
      .def_readonly("s_x_sql", &NoiseBudget::s_x_sql)
      .def_readonly("sql_ratio_linear", &NoiseBudget::sql_ratio_linear)
      .def_readonly("force_sensitivity", &NoiseBudget::force_sensitivity);

  py::class_<ProjectionScenario>(m, "ProjectionScenario")
      .def(py::init<CavityParams, MechanicalMode, double, double, std::vector<double>>(),
           py::arg("cavity"), py::arg("mode"), py::arg("g"), py::arg("t_n"),
           py::arg("power_grid"))
      .def_readonly("g", &ProjectionScenario::g)
      .def_readonly("t_n", &ProjectionScenario::t_n)
      .def_readonly("power_grid", &ProjectionScenario::power_grid);

  py::class_<ProjectionRow>(m, "ProjectionRow")
      .def_readonly("power", &ProjectionRow::power)
      .def_readonly("sx_sn", &ProjectionRow::sx_sn)
      .def_readonly("sx_ba", &ProjectionRow::sx_ba)
      .def_readonly("sx_amp", &ProjectionRow::sx_amp)
      .def_readonly("t_sn", &ProjectionRow::t_sn)
      .def_readonly("t_ba", &ProjectionRow::t_ba)
      .def_readonly("t_amp", &ProjectionRow::t_amp);

  py::class_<MinimumUncertainty>(m, "MinimumUncertainty")
      .def_readonly("power", &MinimumUncertainty::power)
      .def_readonly("linear_ratio_to_sql", &MinimumUncertainty::linear_ratio_to_sql);

  // model / cavity
  m.def("total_quality_factor", &total_quality_factor, py::arg("q_int"), py::arg("q_ext"));
  m.def("cavity_linewidth", &cavity_linewidth, py::arg("cavity"));
  m.def("spring_constant", &spring_constant, py::arg("mode"));
  m.def("coupling_from_geometry", &coupling_from_geometry, py::arg("dcb_dx"),
        py::arg("cavity"));
  m.def("transmission", &transmission, py::arg("cavity"), py::arg("omega"));
  m.def("s_min", &s_min, py::arg("cavity"));
  m.def("quadrature_responsivity", &quadrature_responsivity, py::arg("geometry"),
        py::arg("cavity"));
  m.def("sideband_filter_factor", &sideband_filter_factor, py::arg("omega_m"),
        py::arg("gamma_c"));

  // mechanics
  m.def("thermal_displacement_psd", &thermal_displacement_psd, py::arg("mode"),
        py::arg("delta_omega"));
  m.def("electrostatic_force", &electrostatic_force, py::arg("drive"), py::arg("dcd_dx"));
  m.def(
      "driven_response",
      [](const MechanicalMode& mode, double force, double omega_drive) {
        const auto r = driven_response(mode, force, omega_drive);
        return py::make_tuple(r.amplitude, r.phase);
      },
      py::arg("mode"), py::arg("force"), py::arg("omega_drive"));
  m.def("simulate_langevin", &simulate_langevin, py::arg("mode"), py::arg("drive"),
        py::arg("duration"), py::arg("dt"), py::arg("seed"), py::arg("keep_every") = 1);

  // readout
  m.def("amplifier_phase_floor", &amplifier_phase_floor, py::arg("t_n"),
        py::arg("power_at_detector"));
  m.def("amplifier_quanta", &amplifier_quanta, py::arg("t_n"), py::arg("omega_c"));
  m.def("tls_phase_noise", &tls_phase_noise, py::arg("noise"), py::arg("nu"));
  m.def("detector_power", &detector_power, py::arg("cavity"), py::arg("geometry"));
  m.def(
      "forward_spectrum",
      [](const MechanicalMode& mode, const CavityParams& cavity,
         const CouplingModel& coupling, const ReadoutGeometry& geometry,
         const NoiseModel& noise, const std::vector<double>& grid_hz, std::uint64_t seed,
         int averages, const std::optional<ElectrostaticDrive>& drive) {
        return forward_spectrum(mode, cavity, coupling, geometry, noise, grid_hz, seed,
                                averages, drive);
      },
      py::arg("mode"), py::arg("cavity"), py::arg("coupling"), py::arg("geometry"),
      py::arg("noise"), py::arg("grid_hz"), py::arg("seed"), py::arg("averages") = 0,
      py::arg("drive") = std::optional<ElectrostaticDrive>{});
  m.def("volts_to_cavity_freq_psd", &volts_to_cavity_freq_psd, py::arg("spectrum"),
        py::arg("cavity"), py::arg("geometry"));

  // spectral analysis
  m.def("welch_psd", &welch_psd, py::arg("trajectory"), py::arg("segment_length"),
        py::arg("overlap"));
  m.def("fit_lorentzian", &fit_lorentzian, py::arg("series"), py::arg("lo_hz"),
        py::arg("hi_hz"));
  m.def("fit_sqrt_lorentzian", &fit_sqrt_lorentzian, py::arg("series"), py::arg("lo_hz"),
        py::arg("hi_hz"));
  m.def("integrate_lorentzian", &integrate_lorentzian, py::arg("fit"));
  m.def(
      "temperature_sweep_fit",
      [](const std::vector<TemperaturePoint>& points, const MechanicalMode& mode,
         double min_temp) { return temperature_sweep_fit(points, mode, min_temp); },
      py::arg("points"), py::arg("mode"), py::arg("min_temp"));
  m.def("imprecision_temperature", &imprecision_temperature, py::arg("s_x_im"),
        py::arg("mode"));
  m.def("imprecision_from_temperature", &imprecision_from_temperature, py::arg("t_im"),
        py::arg("mode"));
  m.def(
      "saturation_temperature",
      [](const std::vector<TemperaturePoint>& points, double g, const MechanicalMode& mode) {
        return saturation_temperature(points, g, mode);
      },
      py::arg("low_t_points"), py::arg("g_calibrated"), py::arg("mode"));
  m.def("backaction_temperature", &backaction_temperature, py::arg("s_f"), py::arg("mode"));
  m.def("budget", &budget, py::arg("t_im"), py::arg("t_sat"), py::arg("mode"),
        py::arg("t_ba") = std::optional<double>{});

  // quantum projection
  m.def("shot_noise_imprecision", &shot_noise_imprecision, py::arg("scenario"),
        py::arg("power"));
  m.def("quantum_backaction_force", &quantum_backaction_force, py::arg("scenario"),
        py::arg("power"));
  m.def("backaction_displacement", &backaction_displacement, py::arg("scenario"),
        py::arg("power"));
  m.def("intersection_power", &intersection_power, py::arg("scenario"));
  m.def("amplifier_noise_number", &amplifier_noise_number, py::arg("scenario"));
  m.def("amplifier_imprecision", &amplifier_imprecision, py::arg("scenario"),
        py::arg("power"));
  m.def("minimum_total_uncertainty", &minimum_total_uncertainty, py::arg("scenario"));
  m.def("projection_table", &projection_table, py::arg("scenario"));

  // scenario + orchestration
  py::class_<Scenario>(m, "Scenario")
      .def_readonly("cavity", &Scenario::cavity)
      .def_readonly("v0", &Scenario::v0)
      .def_readonly("mode", &Scenario::mode)
      .def_readonly("coupling", &Scenario::coupling)
      .def_readonly("noise", &Scenario::noise)
      .def_readonly("drive", &Scenario::drive)
      .def("geometry", &Scenario::geometry)
      .def("dt", &Scenario::dt)
      .def("grid_hz", &Scenario::grid_hz);

  m.def("parse_scenario", &parse_scenario, py::arg("text"),
        py::arg("source_name") = "<config>");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("serialize_scenario", &serialize_scenario, py::arg("scenario"));
  m.def("calibrate_gain_via_drive", &calibrate_gain_via_drive, py::arg("low_power"),
        py::arg("high_power"));
}
