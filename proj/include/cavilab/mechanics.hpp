#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cavilab/model.hpp"

namespace cavilab {

/// Electrostatic drive tone applied through the feedline bias tee.
struct DriveSpec {
  double v_dc;         ///< DC bias (V)
  double v_ac;         ///< AC amplitude (V), >= 0
  double omega_drive;  ///< drive angular frequency (rad/s)

  DriveSpec(double v_dc, double v_ac, double omega_drive);
};

/// Drive tone together with the gradient that converts volts to force.
struct ElectrostaticDrive {
  DriveSpec spec;
  double dcd_dx;  ///< drive-capacitance gradient (F/m)
};

/// Displacement record from the time-domain simulator.
struct Trajectory {
  double dt;                    ///< sample interval (s)
  std::vector<double> samples;  ///< displacement (m), burn-in already dropped
  std::uint64_t seed;           ///< seed the realization was generated from
};

/// Single-sided thermal displacement PSD of the mode at angular detuning
/// delta_omega = omega - omega_m from resonance (m^2/Hz):
///   S_x = [1/(m omega_m gamma_m)^2] * 4 m gamma_m k_b T / (1 + 4 delta^2/gamma_m^2).
/// Convention: per-Hz, single-sided, Lorentzian in angular detuning, so the
/// frequency integral equals the equipartition variance k_b T/(m omega_m^2).
double thermal_displacement_psd(const MechanicalMode& mode, double delta_omega);

/// Electrostatic force amplitude F = V_dc * V_ac * dC_d/dx (N).
double electrostatic_force(const DriveSpec& drive, double dcd_dx);

/// Steady-state response of the damped oscillator to a coherent drive.
struct DrivenResponse {
  double amplitude;  ///< displacement amplitude (m)
  double phase;      ///< phase relative to the drive (rad), 0 -> -pi through resonance
};

DrivenResponse driven_response(const MechanicalMode& mode, double force,
                               double omega_drive);

/// Stability bound on the integration step: 2 pi / (50 omega_m).
double langevin_max_dt(const MechanicalMode& mode);

/// Transient length discarded from every simulation: 5 / gamma_m.
double langevin_burn_in(const MechanicalMode& mode);

/// Integrates m x'' + m gamma_m x' + m omega_m^2 x = F_th(t) + F_el(t) with a
/// semi-implicit Euler scheme from a cold start (x = v = 0). The thermal force
/// is white with single-sided PSD 4 k_b T m gamma_m, sampled per step with
/// variance S_F/(2 dt). The first 5/gamma_m of data is dropped; `duration`
/// counts total integrated time including that burn-in. Deterministic for a
/// fixed seed. `keep_every` decimates the stored samples (the oscillator's
/// steep spectral rolloff makes fold-back from decimation negligible as long
/// as the kept rate stays well above omega_m/2pi).
Trajectory simulate_langevin(const MechanicalMode& mode,
                             const std::optional<ElectrostaticDrive>& drive,
                             double duration, double dt, std::uint64_t seed,
                             int keep_every = 1);

}  // namespace cavilab
