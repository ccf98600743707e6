#include "cavilab/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"
#include "cavilab/spectral.hpp"

namespace cavilab {

ProjectionScenario::ProjectionScenario(CavityParams cavity_, MechanicalMode mode_,
                                       double g_, double t_n_,
                                       std::vector<double> power_grid_)
    : cavity(cavity_), mode(mode_), g(g_), t_n(t_n_), power_grid(std::move(power_grid_)) {
  if (!std::isinf(cavity.q_int))
    throw std::invalid_argument("ProjectionScenario: cavity must be lossless (q_int = lossless_q)");
  if (!(std::isfinite(g) && g > 0.0))
    throw std::invalid_argument("ProjectionScenario: g must be > 0");
  if (!(std::isfinite(t_n) && t_n >= 0.0))
    throw std::invalid_argument("ProjectionScenario: t_n must be >= 0");
  for (std::size_t i = 0; i < power_grid.size(); ++i) {
    if (!(std::isfinite(power_grid[i]) && power_grid[i] > 0.0))
      throw std::invalid_argument("ProjectionScenario: powers must be > 0");
    if (i > 0 && !(power_grid[i] > power_grid[i - 1]))
      throw std::invalid_argument("ProjectionScenario: power grid must be ascending");
  }
}

namespace {

// P-independent numerator of the shot-noise imprecision, S_x^sn = A / P.
double shot_noise_coefficient(const ProjectionScenario& sc) {
  const double q = sc.cavity.q_ext;
  const double gamma_c = sc.cavity.omega_c / q;
  const double filter = 1.0 + 4.0 * (sc.mode.omega_m / gamma_c) * (sc.mode.omega_m / gamma_c);
  const double g_rel = sc.g / sc.cavity.omega_c;
  return constants::hbar * sc.cavity.omega_c * filter /
         (2.0 * g_rel * g_rel * (4.0 * q) * (4.0 * q));
}

double mwg(const ProjectionScenario& sc) {
  return sc.mode.mass * sc.mode.omega_m * sc.mode.gamma_m();
}

}  // namespace

double shot_noise_imprecision(const ProjectionScenario& scenario, double power) {
  if (!(std::isfinite(power) && power > 0.0))
    throw std::domain_error("shot_noise_imprecision: power must be > 0");
  return shot_noise_coefficient(scenario) / power;
}

double quantum_backaction_force(const ProjectionScenario& scenario, double power) {
  return constants::hbar * constants::hbar / shot_noise_imprecision(scenario, power);
}

double backaction_displacement(const ProjectionScenario& scenario, double power) {
  const double m = mwg(scenario);
  return quantum_backaction_force(scenario, power) / (m * m);
}

double intersection_power(const ProjectionScenario& scenario) {
  // A/P = (hbar^2/A) P / (m omega gamma)^2  =>  P* = A m omega gamma / hbar.
  return shot_noise_coefficient(scenario) * mwg(scenario) / constants::hbar;
}

double amplifier_noise_number(const ProjectionScenario& scenario) {
  return 2.0 * constants::k_b * scenario.t_n / (constants::hbar * scenario.cavity.omega_c);
}

double amplifier_imprecision(const ProjectionScenario& scenario, double power) {
  return amplifier_noise_number(scenario) * shot_noise_imprecision(scenario, power);
}

MinimumUncertainty minimum_total_uncertainty(const ProjectionScenario& scenario) {
  const double n_amp = amplifier_noise_number(scenario);
  return {intersection_power(scenario) * std::sqrt(n_amp), std::pow(n_amp, 0.25)};
}

std::vector<ProjectionRow> projection_table(const ProjectionScenario& scenario) {
  if (scenario.power_grid.empty())
    throw std::invalid_argument("projection_table: empty power grid");
  std::vector<ProjectionRow> rows;
  rows.reserve(scenario.power_grid.size());
  for (const double p : scenario.power_grid) {
    ProjectionRow row{};
    row.power = p;
    row.sx_sn = shot_noise_imprecision(scenario, p);
    row.sx_ba = backaction_displacement(scenario, p);
    row.sx_amp = amplifier_imprecision(scenario, p);
    row.t_sn = imprecision_temperature(row.sx_sn, scenario.mode);
    row.t_ba = imprecision_temperature(row.sx_ba, scenario.mode);
    row.t_amp = imprecision_temperature(row.sx_amp, scenario.mode);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cavilab
