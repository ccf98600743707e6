#include "cavilab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"
#include "cavilab/fft.hpp"

namespace cavilab {

void SpectrumSeries::validate() const {
  if (frequency_hz.size() != values.size())
    throw std::invalid_argument("SpectrumSeries: grid/value size mismatch");
  if (frequency_hz.size() < 2)
    throw std::invalid_argument("SpectrumSeries: need at least two points");
  for (std::size_t i = 1; i < frequency_hz.size(); ++i)
    if (!(frequency_hz[i] > frequency_hz[i - 1]))
      throw std::invalid_argument("SpectrumSeries: grid must be strictly increasing");
}

SpectrumSeries welch_psd(const Trajectory& trajectory, std::size_t segment_length,
                         double overlap) {
  const std::size_t n = trajectory.samples.size();
  if (segment_length < 8)
    throw std::invalid_argument("welch_psd: segment_length must be >= 8");
  if (segment_length > n)
    throw std::invalid_argument("welch_psd: trajectory shorter than one segment");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw std::invalid_argument("welch_psd: overlap must be in [0, 1)");

  const double fs = 1.0 / trajectory.dt;
  const std::size_t L = segment_length;
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(L) * (1.0 - overlap))));
  const std::size_t segments = 1 + (n - L) / hop;

  std::vector<double> window(L);
  double s2 = 0.0;  // power normalization sum(w^2)
  for (std::size_t i = 0; i < L; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(constants::two_pi * static_cast<double>(i) /
                                      static_cast<double>(L - 1)));
    s2 += window[i] * window[i];
  }

  const std::size_t nbins = L / 2 + 1;
  std::vector<double> accum(nbins, 0.0);
  std::vector<double> buf(L);
  for (std::size_t s = 0; s < segments; ++s) {
    const double* seg = trajectory.samples.data() + s * hop;
    for (std::size_t i = 0; i < L; ++i) buf[i] = seg[i] * window[i];
    const auto spectrum = fft::real_dft(buf);
    for (std::size_t k = 0; k < nbins; ++k) accum[k] += std::norm(spectrum[k]);
  }

  SpectrumSeries out;
  out.units = "m^2/Hz";
  out.frequency_hz.resize(nbins);
  out.values.resize(nbins);
  const double scale = 1.0 / (fs * s2 * static_cast<double>(segments));
  const bool has_nyquist = (L % 2 == 0);
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = (k == 0) || (has_nyquist && k == nbins - 1);
    out.frequency_hz[k] = static_cast<double>(k) * fs / static_cast<double>(L);
    out.values[k] = accum[k] * scale * (edge ? 1.0 : 2.0);
  }
  out.metadata["segments"] = std::to_string(segments);
  out.metadata["segment_length"] = std::to_string(L);
  out.metadata["window"] = "hann";
  return out;
}

double LorentzianFit::model(double omega) const {
  const double x = (omega - center) / fwhm_gamma;
  return background + peak / (1.0 + 4.0 * x * x);
}

namespace {

// Solves a 4x4 system in place (partial pivoting). Returns false if singular.
bool solve4(std::array<double, 16>& a, std::array<double, 4>& b) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r * 4 + col]) > std::abs(a[pivot * 4 + col])) pivot = r;
    if (a[pivot * 4 + col] == 0.0) return false;
    if (pivot != col) {
      for (int c = 0; c < 4; ++c) std::swap(a[col * 4 + c], a[pivot * 4 + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * 4 + col];
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[r * 4 + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < 4; ++c) a[r * 4 + c] -= f * a[col * 4 + c];
      b[r] -= f * b[col];
    }
  }
  for (int col = 3; col >= 0; --col) {
    b[col] /= a[col * 4 + col];
    for (int r = 0; r < col; ++r) b[r] -= a[r * 4 + col] * b[col];
  }
  return true;
}

struct FitData {
  std::vector<double> omega;
  std::vector<double> y;
};

// params: [center, gamma, peak, background] describing the underlying
// Lorentzian; for sqrt_model the prediction is the square root of it.
double predict(const std::array<double, 4>& p, double omega, bool sqrt_model,
               std::array<double, 4>* grad) {
  const double delta = omega - p[0];
  const double gamma = p[1];
  const double u = delta / gamma;
  const double d = 1.0 + 4.0 * u * u;
  double value = p[3] + p[2] / d;
  std::array<double, 4> g{};
  g[0] = p[2] * 8.0 * delta / (gamma * gamma * d * d);
  g[1] = p[2] * 8.0 * delta * delta / (gamma * gamma * gamma * d * d);
  g[2] = 1.0 / d;
  g[3] = 1.0;
  if (sqrt_model) {
    // data is normalized to O(1); the floor keeps gradients finite when the
    // background parameter swings negative during iteration
    value = std::sqrt(std::max(value, 1e-12));
    const double inv2m = 0.5 / value;
    for (auto& gi : g) gi *= inv2m;
  }
  if (grad) *grad = g;
  return value;
}

double chi_squared(const std::array<double, 4>& p, const FitData& data, bool sqrt_model) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < data.omega.size(); ++i) {
    const double r = predict(p, data.omega[i], sqrt_model, nullptr) - data.y[i];
    chi2 += r * r;
  }
  return chi2;
}

LorentzianFit fit_impl(const SpectrumSeries& series, double lo_hz, double hi_hz,
                       bool sqrt_model) {
  series.validate();
  FitData data;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.frequency_hz[i] < lo_hz || series.frequency_hz[i] > hi_hz) continue;
    data.omega.push_back(constants::two_pi * series.frequency_hz[i]);
    data.y.push_back(series.values[i]);
  }
  const std::size_t n = data.omega.size();
  if (n < 8) throw std::invalid_argument("fit window holds fewer than 8 points");

  // Work on data normalized to its maximum so the normal equations stay well
  // conditioned for PSDs of order 1e-24.
  const double y_max = *std::max_element(data.y.begin(), data.y.end());
  const double y_scale = y_max > 0.0 ? y_max : 1.0;
  for (auto& y : data.y) y /= y_scale;

  // Initial guesses from the (squared, for the sqrt model) data.
  std::vector<double> level(data.y);
  if (sqrt_model)
    for (auto& v : level) v *= v;
  std::vector<double> sorted(level);
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  const auto imax = static_cast<std::size_t>(
      std::max_element(level.begin(), level.end()) - level.begin());
  const double peak0 = std::max(level[imax] - median, 1e-12);
  const double half = median + 0.5 * peak0;
  std::size_t above = 0;
  for (const auto v : level)
    if (v > half) ++above;
  const double domega = (data.omega.back() - data.omega.front()) / static_cast<double>(n - 1);
  const double gamma0 = std::max<double>(above, 3) * domega;

  std::array<double, 4> p{data.omega[imax], gamma0, peak0, median};
  double chi2 = chi_squared(p, data, sqrt_model);

  LorentzianFit fit;
  fit.converged = false;

  // Iterates must keep gamma positive and, for the sqrt model, the inner
  // Lorentzian positive across the window so the model stays smooth.
  const auto admissible = [&](const std::array<double, 4>& t) {
    if (!(t[1] > 0.0)) return false;
    if (!sqrt_model) return true;
    const double dmax =
        std::max(std::abs(data.omega.front() - t[0]), std::abs(data.omega.back() - t[0]));
    const double u = dmax / t[1];
    return t[3] + t[2] / (1.0 + 4.0 * u * u) > 0.0;
  };

  constexpr int max_iter = 200;
  double lambda = 1e-3;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::array<double, 16> jtj{};
    std::array<double, 4> jtr{};
    std::array<double, 4> grad{};
    for (std::size_t i = 0; i < n; ++i) {
      const double r = predict(p, data.omega[i], sqrt_model, &grad) - data.y[i];
      for (int a = 0; a < 4; ++a) {
        jtr[a] += grad[a] * r;
        for (int b = a; b < 4; ++b) jtj[a * 4 + b] += grad[a] * grad[b];
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];

    // Convergence is judged on the undamped step so damping cannot shrink a
    // far-from-optimal step below the threshold.
    std::array<double, 16> plain = jtj;
    for (int a = 0; a < 4; ++a)
      plain[a * 4 + a] += 1e-14 * std::max(plain[a * 4 + a], 1e-300);
    std::array<double, 4> step0 = jtr;
    if (!solve4(plain, step0)) break;
    // peak and background live in data-normalized units, so their step is
    // measured against the data scale when the parameter itself is near zero
    double rel_step = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double floor = (a >= 2) ? 1e-3 : 1e-30;
      const double scale = std::max(std::abs(p[a]), floor);
      rel_step = std::max(rel_step, std::abs(step0[a]) / scale);
    }
    if (rel_step < 1e-9) {
      fit.converged = true;
      break;
    }

    // Levenberg damping: retry with stronger damping until chi^2 improves.
    bool accepted = false;
    while (lambda <= 1e12) {
      std::array<double, 16> lhs = jtj;
      for (int a = 0; a < 4; ++a)
        lhs[a * 4 + a] += lambda * std::max(jtj[a * 4 + a], 1e-300) + 1e-14 * jtj[a * 4 + a];
      std::array<double, 4> step = jtr;
      if (!solve4(lhs, step)) break;
      std::array<double, 4> trial{};
      for (int a = 0; a < 4; ++a) trial[a] = p[a] - step[a];
      if (admissible(trial)) {
        const double trial_chi2 = chi_squared(trial, data, sqrt_model);
        if (trial_chi2 < chi2) {
          p = trial;
          chi2 = trial_chi2;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // chi^2 cannot be resolved any further in double precision; the
      // undamped step length tells whether we are actually at the optimum
      fit.converged = rel_step < 1e-5;
      break;
    }
  }

  fit.iterations = iter;
  fit.center = p[0];
  fit.fwhm_gamma = p[1];
  const double unit = sqrt_model ? y_scale * y_scale : y_scale;
  fit.peak = p[2] * unit;
  fit.background = p[3] * unit;
  fit.chi2 = chi2 * y_scale * y_scale;
  if (fit.peak < 0.0) fit.converged = false;  // negative-peak data

  // Covariance sigma^2 (J^T J)^-1 in scaled units, mapped back afterwards.
  if (n > 4) {
    std::array<double, 16> jtj{};
    std::array<double, 4> grad{};
    for (std::size_t i = 0; i < n; ++i) {
      predict(p, data.omega[i], sqrt_model, &grad);
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) jtj[a * 4 + b] += grad[a] * grad[b];
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];
    const double sigma2 = chi2 / static_cast<double>(n - 4);
    std::array<double, 16> cov{};
    bool ok = true;
    for (int col = 0; col < 4 && ok; ++col) {
      std::array<double, 16> lhs = jtj;
      std::array<double, 4> e{};
      e[col] = 1.0;
      ok = solve4(lhs, e);
      for (int r = 0; r < 4; ++r) cov[r * 4 + col] = e[r] * sigma2;
    }
    if (ok) {
      const std::array<double, 4> unit_scale{1.0, 1.0, unit, unit};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          fit.covariance[r * 4 + c] = cov[r * 4 + c] * unit_scale[r] * unit_scale[c];
    }
  }
  return fit;
}

}  // namespace

LorentzianFit fit_lorentzian(const SpectrumSeries& series, double lo_hz, double hi_hz) {
  return fit_impl(series, lo_hz, hi_hz, false);
}

LorentzianFit fit_sqrt_lorentzian(const SpectrumSeries& series, double lo_hz,
                                  double hi_hz) {
  return fit_impl(series, lo_hz, hi_hz, true);
}

double integrate_lorentzian(const LorentzianFit& fit) {
  if (!fit.converged)
    throw NumericalError("integrate_lorentzian: fit did not converge");
  return fit.peak * fit.fwhm_gamma / 4.0;
}

TemperatureSweepResult temperature_sweep_fit(std::span<const TemperaturePoint> points,
                                             const MechanicalMode& mode,
                                             double min_temp) {
  TemperatureSweepResult result;
  result.fit_window_min_temp = min_temp;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].temperature >= min_temp) result.used_indices.push_back(i);
  if (result.used_indices.size() < 3)
    throw NumericalError("temperature_sweep_fit: need >= 3 points at or above min_temp");

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const auto n = static_cast<double>(result.used_indices.size());
  for (const auto i : result.used_indices) {
    st += points[i].temperature;
    sy += points[i].delta_omega_c_sq;
    stt += points[i].temperature * points[i].temperature;
    sty += points[i].temperature * points[i].delta_omega_c_sq;
  }
  const double denom = n * stt - st * st;
  if (denom <= 0.0) throw NumericalError("temperature_sweep_fit: degenerate temperatures");
  result.slope = (n * sty - st * sy) / denom;
  result.intercept = (sy - result.slope * st) / n;
  if (!(result.slope > 0.0))
    throw NumericalError("temperature_sweep_fit: non-positive slope (unphysical coupling)");

  result.g_fit = std::sqrt(result.slope * mode.mass * mode.omega_m * mode.omega_m /
                           constants::k_b);
  result.t_intercept = result.intercept / result.slope;
  for (const auto i : result.used_indices)
    result.residuals.push_back(points[i].delta_omega_c_sq -
                               (result.intercept + result.slope * points[i].temperature));
  return result;
}

double imprecision_temperature(double s_x_im, const MechanicalMode& mode) {
  if (!(std::isfinite(s_x_im) && s_x_im >= 0.0))
    throw std::invalid_argument("imprecision_temperature: s_x_im must be >= 0");
  return s_x_im * mode.mass * mode.omega_m * mode.omega_m * mode.gamma_m() /
         (4.0 * constants::k_b);
}

double imprecision_from_temperature(double t_im, const MechanicalMode& mode) {
  if (!(std::isfinite(t_im) && t_im >= 0.0))
    throw std::invalid_argument("imprecision_from_temperature: t_im must be >= 0");
  return 4.0 * constants::k_b * t_im /
         (mode.mass * mode.omega_m * mode.omega_m * mode.gamma_m());
}

double saturation_temperature(std::span<const TemperaturePoint> low_t_points,
                              double g_calibrated, const MechanicalMode& mode) {
  if (low_t_points.empty())
    throw NumericalError("saturation_temperature: need at least one base point");
  if (!(std::isfinite(g_calibrated) && g_calibrated > 0.0))
    throw NumericalError("saturation_temperature: requires a prior coupling calibration");
  const auto base = std::min_element(
      low_t_points.begin(), low_t_points.end(),
      [](const auto& a, const auto& b) { return a.temperature < b.temperature; });
  return base->delta_omega_c_sq * mode.mass * mode.omega_m * mode.omega_m /
         (g_calibrated * g_calibrated * constants::k_b);
}

double backaction_temperature(double s_f, const MechanicalMode& mode) {
  if (!(std::isfinite(s_f) && s_f >= 0.0))
    throw std::invalid_argument("backaction_temperature: s_f must be >= 0");
  return s_f / (4.0 * constants::k_b * mode.mass * mode.gamma_m());
}

NoiseBudget budget(double t_im, double t_sat, const MechanicalMode& mode,
                   std::optional<double> t_ba) {
  if (!(t_im >= 0.0) || !(t_sat >= 0.0))
    throw std::invalid_argument("budget: temperatures must be >= 0");
  NoiseBudget b;
  b.t_im = t_im;
  b.t_sat = t_sat;
  b.t_ba = t_ba;
  b.s_x_im = imprecision_from_temperature(t_im, mode);
  b.s_x_sql = constants::hbar / (mode.mass * mode.omega_m * mode.gamma_m());
  b.sql_ratio_linear =
      std::sqrt(4.0 * constants::k_b * (t_im + t_sat) / (constants::hbar * mode.omega_m));
  b.force_sensitivity =
      std::sqrt(4.0 * constants::k_b * (t_im + t_sat) * mode.mass * mode.gamma_m());
  return b;
}

}  // namespace cavilab
