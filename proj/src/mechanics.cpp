#include "cavilab/mechanics.hpp"

#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"
#include "cavilab/rng.hpp"

namespace cavilab {

DriveSpec::DriveSpec(double v_dc_, double v_ac_, double omega_drive_)
    : v_dc(v_dc_), v_ac(v_ac_), omega_drive(omega_drive_) {
  if (!std::isfinite(v_dc)) throw std::invalid_argument("DriveSpec: v_dc must be finite");
  if (!(std::isfinite(v_ac) && v_ac >= 0.0))
    throw std::invalid_argument("DriveSpec: v_ac must be >= 0");
  if (!(std::isfinite(omega_drive) && omega_drive > 0.0))
    throw std::invalid_argument("DriveSpec: omega_drive must be > 0");
}

double thermal_displacement_psd(const MechanicalMode& mode, double delta_omega) {
  const double gamma = mode.gamma_m();
  const double denom = mode.mass * mode.omega_m * gamma;
  const double peak = 4.0 * mode.mass * gamma * constants::k_b * mode.temperature_bath /
                      (denom * denom);
  const double x = delta_omega / gamma;
  return peak / (1.0 + 4.0 * x * x);
}

double electrostatic_force(const DriveSpec& drive, double dcd_dx) {
  return drive.v_dc * drive.v_ac * dcd_dx;
}

DrivenResponse driven_response(const MechanicalMode& mode, double force,
                               double omega_drive) {
  const double gamma = mode.gamma_m();
  const double w2 = mode.omega_m * mode.omega_m;
  const double d2 = omega_drive * omega_drive;
  const double re = w2 - d2;
  const double im = gamma * omega_drive;
  const double amplitude = (force / mode.mass) / std::hypot(re, im);
  const double phase = -std::atan2(im, re);
  return {amplitude, phase};
}

double langevin_max_dt(const MechanicalMode& mode) {
  return constants::two_pi / (50.0 * mode.omega_m);
}

double langevin_burn_in(const MechanicalMode& mode) { return 5.0 / mode.gamma_m(); }

Trajectory simulate_langevin(const MechanicalMode& mode,
                             const std::optional<ElectrostaticDrive>& drive,
                             double duration, double dt, std::uint64_t seed,
                             int keep_every) {
  if (!(std::isfinite(dt) && dt > 0.0))
    throw std::invalid_argument("simulate_langevin: dt must be > 0");
  if (dt > langevin_max_dt(mode))
    throw std::domain_error(
        "simulate_langevin: dt exceeds the stability bound 2 pi / (50 omega_m)");
  if (keep_every < 1) throw std::invalid_argument("simulate_langevin: keep_every must be >= 1");

  const double burn_in = langevin_burn_in(mode);
  if (!(std::isfinite(duration) && duration > burn_in))
    throw std::invalid_argument(
        "simulate_langevin: duration must exceed the 5/gamma_m burn-in");

  const double gamma = mode.gamma_m();
  const double w2 = mode.omega_m * mode.omega_m;
  const double inv_m = 1.0 / mode.mass;

  // White thermal force, single-sided PSD S_F = 4 k_b T m gamma_m, held
  // constant over each step: per-step variance S_F / (2 dt).
  const double s_f = 4.0 * constants::k_b * mode.temperature_bath * mode.mass * gamma;
  const double sigma_f = std::sqrt(s_f / (2.0 * dt));

  double drive_force = 0.0;
  double omega_drive = 0.0;
  if (drive) {
    drive_force = electrostatic_force(drive->spec, drive->dcd_dx);
    omega_drive = drive->spec.omega_drive;
  }

  const auto n_total = static_cast<std::size_t>(std::llround(duration / dt));
  const auto n_burn = static_cast<std::size_t>(std::ceil(burn_in / dt));
  if (n_total <= n_burn + 1)
    throw std::invalid_argument("simulate_langevin: duration too short after burn-in");

  Trajectory out;
  out.dt = dt * keep_every;
  out.seed = seed;
  out.samples.reserve((n_total - n_burn) / keep_every + 1);

  Rng rng(seed);
  double x = 0.0;
  double v = 0.0;
  for (std::size_t k = 0; k < n_total; ++k) {
    double f = drive_force != 0.0 ? drive_force * std::cos(omega_drive * (dt * k)) : 0.0;
    if (sigma_f > 0.0) f += sigma_f * rng.gaussian();
    v += dt * (-gamma * v - w2 * x + f * inv_m);
    x += dt * v;
    if (k >= n_burn && (k - n_burn) % static_cast<std::size_t>(keep_every) == 0)
      out.samples.push_back(x);
  }

  if (out.samples.size() < 2)
    throw std::invalid_argument("simulate_langevin: fewer than two retained samples");
  return out;
}

}  // namespace cavilab
