#pragma once

#include <vector>

#include "cavilab/model.hpp"

namespace cavilab {

/// Idealized single-port reflection readout used for quantum-limit
/// projections: lossless cavity (q_int = lossless_q), Q = q_ext.
struct ProjectionScenario {
  CavityParams cavity;
  MechanicalMode mode;
  double g;    ///< cavity pull (rad/s per m)
  double t_n;  ///< amplifier noise temperature (K)
  std::vector<double> power_grid;  ///< ascending incident powers (W)

  ProjectionScenario(CavityParams cavity, MechanicalMode mode, double g, double t_n,
                     std::vector<double> power_grid);
};

/// Shot-noise-limited displacement imprecision for a square-law detector on
/// the reflection port:
///   S_x^sn = hbar omega_c (1 + 4 (omega_m/gamma_c)^2) / (2 (g/omega_c)^2 P (4Q)^2).
double shot_noise_imprecision(const ProjectionScenario& scenario, double power);

/// Quantum backaction force PSD hbar^2 / S_x^sn; the product with the
/// shot-noise imprecision is hbar^2 identically.
double quantum_backaction_force(const ProjectionScenario& scenario, double power);

/// Displacement-referred backaction S_F^ba / (m omega_m gamma_m)^2.
double backaction_displacement(const ProjectionScenario& scenario, double power);

/// Power where shot-noise imprecision equals backaction-driven displacement
/// (closed form; S_x^sn ~ 1/P meets S_x^ba ~ P).
double intersection_power(const ProjectionScenario& scenario);

/// Amplifier quanta referred to the shot-noise limit. Convention:
/// N_amp = 2 k_b t_n / (hbar omega_c), so a quantum-limited two-quadrature
/// voltage amplifier (k_b t_n = hbar omega_c) doubles the shot-noise
/// imprecision and N_amp = 1 marks the standard-quantum-limit floor.
double amplifier_noise_number(const ProjectionScenario& scenario);

/// Amplifier-limited imprecision N_amp * S_x^sn.
double amplifier_imprecision(const ProjectionScenario& scenario, double power);

struct MinimumUncertainty {
  double power;                ///< optimum incident power (W)
  double linear_ratio_to_sql;  ///< sqrt(min total / (2 S_x_sql)) = N_amp^(1/4)
};

/// Minimizes amplifier imprecision plus backaction displacement over power.
/// The minimum is 2 sqrt(N_amp) hbar/(m omega_m gamma_m), reached at
/// intersection_power * sqrt(N_amp); referred to the balanced quantum-limit
/// total 2 S_x_sql the linear distance is N_amp^(1/4).
MinimumUncertainty minimum_total_uncertainty(const ProjectionScenario& scenario);

struct ProjectionRow {
  double power;   ///< W
  double sx_sn;   ///< m^2/Hz
  double sx_ba;   ///< displacement-referred backaction, m^2/Hz
  double sx_amp;  ///< m^2/Hz
  double t_sn;    ///< temperature equivalents (K)
  double t_ba;
  double t_amp;
};

/// Evaluates the three projection curves over the scenario power grid.
std::vector<ProjectionRow> projection_table(const ProjectionScenario& scenario);

}  // namespace cavilab
