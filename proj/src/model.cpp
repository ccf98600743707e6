#include "cavilab/model.hpp"

#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"

namespace cavilab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// q may be the lossless sentinel (+inf) but never NaN, zero or negative.
bool valid_q(double q) { return q > 0.0 && !std::isnan(q); }

}  // namespace

CavityParams::CavityParams(double omega_c_, double q_int_, double q_ext_,
                           double z_line_, double power_incident_)
    : omega_c(omega_c_),
      q_int(q_int_),
      q_ext(q_ext_),
      z_line(z_line_),
      power_incident(power_incident_) {
  require(positive_finite(omega_c), "CavityParams: omega_c must be > 0");
  require(valid_q(q_int), "CavityParams: q_int must be > 0 (lossless_q allowed)");
  require(valid_q(q_ext), "CavityParams: q_ext must be > 0 (lossless_q allowed)");
  require(positive_finite(z_line), "CavityParams: z_line must be > 0");
  require(std::isfinite(power_incident) && power_incident >= 0.0,
          "CavityParams: power_incident must be >= 0");
}

MechanicalMode::MechanicalMode(double omega_m_, double mass_, double q_m_,
                               double temperature_bath_)
    : omega_m(omega_m_), mass(mass_), q_m(q_m_), temperature_bath(temperature_bath_) {
  require(positive_finite(omega_m), "MechanicalMode: omega_m must be > 0");
  require(positive_finite(mass), "MechanicalMode: mass must be > 0");
  require(positive_finite(q_m), "MechanicalMode: q_m must be > 0");
  require(std::isfinite(temperature_bath) && temperature_bath >= 0.0,
          "MechanicalMode: temperature_bath must be >= 0");
}

double MechanicalMode::x_zp() const {
  return std::sqrt(constants::hbar / (2.0 * mass * omega_m));
}

CouplingModel::CouplingModel(double dcb_dx_, double dcd_dx_, double g_)
    : dcb_dx(dcb_dx_), dcd_dx(dcd_dx_), g(g_) {
  require(std::isfinite(dcb_dx) && dcb_dx >= 0.0, "CouplingModel: dcb_dx must be >= 0");
  require(std::isfinite(dcd_dx) && dcd_dx >= 0.0, "CouplingModel: dcd_dx must be >= 0");
  require(std::isfinite(g) && g >= 0.0, "CouplingModel: g must be >= 0");
}

CouplingModel CouplingModel::from_geometry(double dcb_dx, double dcd_dx,
                                           const CavityParams& cavity) {
  return CouplingModel(dcb_dx, dcd_dx, coupling_from_geometry(dcb_dx, cavity));
}

double total_quality_factor(double q_int, double q_ext) {
  if (!valid_q(q_int) || !valid_q(q_ext))
    throw std::domain_error("total_quality_factor: quality factors must be > 0");
  const double inv = 1.0 / q_int + 1.0 / q_ext;
  if (inv == 0.0) return lossless_q;  // both lossless
  return 1.0 / inv;
}

double cavity_linewidth(const CavityParams& cavity) {
  return cavity.omega_c / total_quality_factor(cavity.q_int, cavity.q_ext);
}

double spring_constant(const MechanicalMode& mode) {
  return mode.mass * mode.omega_m * mode.omega_m;
}

double coupling_from_geometry(double dcb_dx, const CavityParams& cavity) {
  if (!(std::isfinite(dcb_dx) && dcb_dx >= 0.0))
    throw std::domain_error("coupling_from_geometry: dcb_dx must be >= 0");
  return cavity.omega_c * cavity.omega_c * dcb_dx * 4.0 * cavity.z_line /
         constants::two_pi;
}

}  // namespace cavilab
