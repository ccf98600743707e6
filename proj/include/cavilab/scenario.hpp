#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavilab/cavity.hpp"
#include "cavilab/mechanics.hpp"
#include "cavilab/model.hpp"
#include "cavilab/readout.hpp"

namespace cavilab {

/// Execution controls from the [run] section. Times and frequencies are SI
/// here; the config file carries the units in its key names.
struct RunControls {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  std::optional<double> dt_s;        ///< default: 2 pi / (300 omega_m)
  int keep_every = 1;                ///< stored-sample decimation
  int averages = 100;                ///< periodogram averages for synthetic spectra
  bool statistical = true;           ///< per-bin periodogram statistics on/off
  std::optional<double> grid_min_hz;
  std::optional<double> grid_max_hz;
  int grid_points = 2001;
  std::size_t welch_segment = 65536;
  double welch_overlap = 0.5;
  std::optional<double> fit_window_min_hz;
  std::optional<double> fit_window_max_hz;
  bool probe_detuned = false;  ///< detune the probe by omega_m (good-cavity operation)
};

/// Sweep axes from the [sweep] section.
struct SweepAxes {
  std::vector<double> powers_w;
  std::vector<double> temperatures_k;
  double min_fit_temp_k = 0.127;
  /// Synthetic beam-temperature floor(s) for generated data: empty, one value,
  /// or one per power point. The effective beam temperature at a point is
  /// max(base temperature, floor).
  std::vector<double> saturation_k;
  std::optional<double> base_temperature_k;
};

/// Full description of one run: device, noise, drive and controls.
struct Scenario {
  CavityParams cavity;
  double v0;  ///< off-resonance carrier amplitude at the detector (V)
  MechanicalMode mode;
  CouplingModel coupling;
  NoiseModel noise;
  std::optional<DriveSpec> drive;
  RunControls run;
  SweepAxes sweep;

  /// Normalized config literals this scenario was parsed from (section ->
  /// key -> value text). serialize_scenario() reproduces them verbatim, which
  /// makes parse -> serialize -> parse the exact identity.
  std::map<std::string, std::map<std::string, std::string>> raw;

  Scenario(CavityParams cavity, double v0, MechanicalMode mode, CouplingModel coupling,
           NoiseModel noise, std::optional<DriveSpec> drive, RunControls run,
           SweepAxes sweep);

  /// Carrier operating point (probe on resonance; detuning recorded when
  /// probe_detuned is set).
  ReadoutGeometry geometry() const;

  std::optional<ElectrostaticDrive> electrostatic_drive() const;

  /// Integration step: configured dt or 2 pi / (300 omega_m).
  double dt() const;

  /// Frequency grid for synthetic spectra; defaults to +-10 mechanical
  /// linewidths around the mechanical resonance.
  std::vector<double> grid_hz() const;

  /// Lorentzian fit window; defaults to +-8 mechanical linewidths.
  std::pair<double, double> fit_window_hz() const;
};

/// Parses a scenario from config text. `source_name` labels diagnostics
/// (file:line: message). Unknown sections or keys are hard errors.
Scenario parse_scenario(const std::string& text, const std::string& source_name = "<config>");

/// Reads and parses a scenario file.
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical config text for a parsed scenario (sections and keys in fixed
/// order, value literals preserved).
std::string serialize_scenario(const Scenario& scenario);

}  // namespace cavilab
