#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cavilab/io.hpp"
#include "cavilab/scenario.hpp"
#include "cavilab/spectral.hpp"

namespace cavilab {

/// File inventory of a completed run; every run also writes manifest.json.
struct RunOutputs {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

/// Per-temperature result of the thermal calibration pipeline.
struct CalibrationPoint {
  double temperature_k = 0.0;
  double delta_omega_c_sq = 0.0;  ///< integrated peak, (rad/s)^2
  LorentzianFit fit;
  bool included = false;  ///< used by the linear fit (inside the window)
  bool failed = false;    ///< fit failure at this temperature
  std::string error;
};

struct CalibrationResult {
  std::vector<CalibrationPoint> points;
  TemperatureSweepResult sweep;
};

struct BudgetPoint {
  double power_w = 0.0;
  double beam_temperature_k = 0.0;  ///< effective temperature the data was generated at
  NoiseBudget noise_budget;
  LorentzianFit fit;
};

/// Langevin trajectory -> Welch -> detector forward map -> frequency-shift
/// PSD -> Lorentzian fit -> integrated peak, at one bath temperature.
/// The detector noise floors are added with the same periodogram statistics
/// (segment count) as the Welch estimate carries.
CalibrationPoint calibrate_point(const Scenario& scenario, double temperature_k,
                                 std::uint64_t seed);

/// Full temperature sweep (parallel fan-out; per-point seeds derived from the
/// master seed and point index, so execution order cannot change results).
CalibrationResult calibrate_sweep(const Scenario& scenario, bool parallel = true);

/// Budget pipeline at one incident power: synthetic detected spectrum at the
/// base temperature (with any configured saturation floor), fitted; the fit
/// background gives T_im, the integrated peak gives T_sat.
BudgetPoint budget_point(const Scenario& scenario, double power_w,
                         double saturation_floor_k, std::uint64_t seed);

std::vector<BudgetPoint> budget_sweep(const Scenario& scenario, bool parallel = true);

/// Drive-tone gain calibration: identical electrostatic drive in both
/// scenarios, the low-power one trusted. Returns the estimated gain factor of
/// the high-power scenario after dividing out the known responsivity scaling.
/// Throws NumericalError when the drive peak is not detectable.
double calibrate_gain_via_drive(const Scenario& low_power, const Scenario& high_power);

// ---------------------------------------------------------------------------
// File-emitting entry points used by the CLI. All validation happens before
// anything is written.
// ---------------------------------------------------------------------------

RunOutputs run_simulate(const Scenario& scenario, const std::filesystem::path& out_dir);
RunOutputs run_calibrate(const Scenario& scenario, const std::filesystem::path& out_dir);
RunOutputs run_budget(const Scenario& scenario, const std::filesystem::path& out_dir);
RunOutputs run_project(const Scenario& scenario, const std::filesystem::path& out_dir);
RunOutputs run_gaincal(const Scenario& low_power, const Scenario& high_power,
                       const std::filesystem::path& out_dir);
RunOutputs run_fit(const Scenario& scenario,
                   const std::optional<std::filesystem::path>& input_csv, bool sqrt_model,
                   const std::filesystem::path& out_dir);

}  // namespace cavilab
