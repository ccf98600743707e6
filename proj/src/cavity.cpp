#include "cavilab/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavilab {

ReadoutGeometry::ReadoutGeometry(double v0_, double s_min_, double detuning_)
    : v0(v0_), s_min(s_min_), detuning(detuning_) {
  if (!(std::isfinite(v0) && v0 > 0.0))
    throw std::invalid_argument("ReadoutGeometry: v0 must be > 0");
  if (!(std::isfinite(s_min) && s_min >= 0.0 && s_min <= 1.0))
    throw std::invalid_argument("ReadoutGeometry: s_min must be in [0, 1]");
  if (!std::isfinite(detuning))
    throw std::invalid_argument("ReadoutGeometry: detuning must be finite");
}

ReadoutGeometry ReadoutGeometry::on_resonance(const CavityParams& cavity, double v0) {
  return ReadoutGeometry(v0, cavilab::s_min(cavity), 0.0);
}

std::complex<double> transmission(const CavityParams& cavity, double omega) {
  const double q = total_quality_factor(cavity.q_int, cavity.q_ext);
  const std::complex<double> denom(1.0, 2.0 * q * (omega - cavity.omega_c) / cavity.omega_c);
  return 1.0 - (q / cavity.q_ext) / denom;
}

double s_min(const CavityParams& cavity) {
  const double q = total_quality_factor(cavity.q_int, cavity.q_ext);
  // the exact value lies in [0, 1]; rounding of 1/(1/q) can stray an ulp
  return std::clamp(1.0 - q / cavity.q_ext, 0.0, 1.0);
}

double quadrature_responsivity(const ReadoutGeometry& geometry,
                               const CavityParams& cavity) {
  const double q = total_quality_factor(cavity.q_int, cavity.q_ext);
  return (2.0 * q / cavity.omega_c) * geometry.v0 * (1.0 - geometry.s_min);
}

double sideband_filter_factor(double omega_m, double gamma_c) {
  if (!(std::isfinite(gamma_c) && gamma_c > 0.0))
    throw std::domain_error("sideband_filter_factor: gamma_c must be > 0");
  if (!(std::isfinite(omega_m) && omega_m >= 0.0))
    throw std::domain_error("sideband_filter_factor: omega_m must be >= 0");
  const double x = omega_m / gamma_c;
  return 1.0 + 4.0 * x * x;
}

std::vector<TransmissionPoint> transmission_sweep(const CavityParams& cavity,
                                                  double omega_lo, double omega_hi,
                                                  int n) {
  if (n < 2 || !(omega_hi > omega_lo))
    throw std::invalid_argument("transmission_sweep: need omega_hi > omega_lo and n >= 2");
  std::vector<TransmissionPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  const double step = (omega_hi - omega_lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double omega = omega_lo + step * i;
    out.push_back({omega, transmission(cavity, omega)});
  }
  return out;
}

}  // namespace cavilab
