#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavilab/mechanics.hpp"
#include "cavilab/model.hpp"

namespace cavilab {

/// Frequency-indexed single-sided series (PSD or any per-frequency quantity)
/// with a units tag and free-form metadata.
struct SpectrumSeries {
  std::vector<double> frequency_hz;  ///< strictly increasing grid
  std::vector<double> values;
  std::string units;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return frequency_hz.size(); }

  /// Throws std::invalid_argument if the grid and values are inconsistent.
  void validate() const;
};

/// Welch-averaged single-sided PSD of a trajectory. Hann window with power
/// normalization, so Parseval holds: sum(PSD) * df equals the signal variance
/// for broadband input and A^2/2 for a tone of amplitude A. DC and Nyquist
/// bins are not doubled. `overlap` is the fractional segment overlap in
/// [0, 1); 0.5 is the usual choice.
SpectrumSeries welch_psd(const Trajectory& trajectory, std::size_t segment_length,
                         double overlap);

/// Result of a Lorentzian (or sqrt-Lorentzian) least-squares fit.
/// Model: B + S0 / (1 + 4 (omega - center)^2 / fwhm_gamma^2), with omega in
/// rad/s; the sqrt variant fits the square root of that expression.
struct LorentzianFit {
  double center = 0.0;      ///< peak position (rad/s)
  double fwhm_gamma = 0.0;  ///< full width at half maximum (rad/s)
  double peak = 0.0;        ///< S0, height above background (series units)
  double background = 0.0;  ///< flat background (series units)
  /// Parameter covariance, row-major 4x4 in order (center, fwhm, peak, background).
  std::array<double, 16> covariance{};
  bool converged = false;
  int iterations = 0;
  double chi2 = 0.0;

  /// Evaluates the fitted model at angular frequency omega.
  double model(double omega) const;
};

/// Damped Gauss-Newton Lorentzian fit over the window [lo_hz, hi_hz].
/// Initial guesses come from the data (argmax, median, half-max width);
/// convergence when the relative parameter step drops below 1e-9, capped at
/// 200 iterations. Never throws on non-convergence or a negative peak — the
/// flags on the result carry that information.
LorentzianFit fit_lorentzian(const SpectrumSeries& series, double lo_hz, double hi_hz);

/// Same machinery with model sqrt(B + S0/(1 + 4 delta^2/gamma^2)); used for
/// driven amplitude responses.
LorentzianFit fit_sqrt_lorentzian(const SpectrumSeries& series, double lo_hz,
                                  double hi_hz);

/// Background-free area of the fitted peak: peak * fwhm_gamma / 4, in
/// (series units) x Hz. Throws NumericalError for an unconverged fit.
double integrate_lorentzian(const LorentzianFit& fit);

/// One point of a thermal calibration sweep.
struct TemperaturePoint {
  double temperature;       ///< cryostat temperature (K)
  double delta_omega_c_sq;  ///< integrated peak in cavity-pull units ((rad/s)^2)
};

struct TemperatureSweepResult {
  double g_fit = 0.0;                ///< calibrated cavity pull (rad/s per m)
  double t_intercept = 0.0;          ///< intercept / slope (K)
  double fit_window_min_temp = 0.0;  ///< threshold used (K)
  double slope = 0.0;                ///< (rad/s)^2 per K
  double intercept = 0.0;            ///< (rad/s)^2
  std::vector<std::size_t> used_indices;  ///< points inside the fit window
  std::vector<double> residuals;          ///< per used point, data - line
};

/// Unweighted linear fit of delta_omega_c^2 vs temperature over points with
/// T >= min_temp; the slope g^2 k_b/(m omega_m^2) gives the coupling.
/// Throws NumericalError on fewer than 3 usable points or a non-positive
/// slope (unphysical coupling).
TemperatureSweepResult temperature_sweep_fit(std::span<const TemperaturePoint> points,
                                             const MechanicalMode& mode,
                                             double min_temp);

/// Imprecision temperature T_im = S_x^im m omega_m^2 gamma_m / (4 k_b).
double imprecision_temperature(double s_x_im, const MechanicalMode& mode);

/// Inverse of imprecision_temperature: S_x^im = 4 k_b T / (m omega_m^2 gamma_m).
double imprecision_from_temperature(double t_im, const MechanicalMode& mode);

/// Equivalent temperature of the base-temperature beam fluctuations, using a
/// previously calibrated coupling: T_sat = delta_omega_c^2 m omega_m^2/(g^2 k_b)
/// evaluated at the lowest-temperature point. This is a conservative upper
/// limit on measurement backaction, not a backaction temperature.
double saturation_temperature(std::span<const TemperaturePoint> low_t_points,
                              double g_calibrated, const MechanicalMode& mode);

/// Temperature equivalent of a force PSD: T = S_F / (4 k_b m gamma_m).
double backaction_temperature(double s_f, const MechanicalMode& mode);

/// Derived noise temperatures and sensitivities for one operating point.
struct NoiseBudget {
  double t_im = 0.0;   ///< imprecision temperature (K)
  double t_sat = 0.0;  ///< saturation temperature (K)
  std::optional<double> t_ba;  ///< backaction estimate when available (K)
  double s_x_im = 0.0;             ///< imprecision PSD (m^2/Hz)
  double s_x_sql = 0.0;            ///< hbar/(m omega_m gamma_m) (m^2/Hz)
  double sql_ratio_linear = 0.0;   ///< sqrt((S_x^im + S_x^sat)/S_x_sql)
  double force_sensitivity = 0.0;  ///< sqrt(4 k_b (T_im + T_sat) m gamma_m) (N/rtHz)
};

/// Assembles the budget from calibrated temperatures. Each temperature maps
/// to displacement units via S_x/S_x_sql = 4 k_b T/(hbar omega_m); the linear
/// ratio reported for the combined uncertainty is
/// sqrt(4 k_b (T_im + T_sat)/(hbar omega_m)), i.e. the imprecision and
/// saturation PSDs summed and referred to the single-sided S_x_sql.
NoiseBudget budget(double t_im, double t_sat, const MechanicalMode& mode,
                   std::optional<double> t_ba = std::nullopt);

}  // namespace cavilab
