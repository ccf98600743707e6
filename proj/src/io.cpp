#include "cavilab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"

namespace cavilab::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!out) throw NumericalError("cannot open output file '" + path.string() + "'");
  return out;
}

void write_metadata(std::ofstream& out, const Metadata& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << " = " << value << "\n";
}

}  // namespace

std::string format_number(double value, int precision) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  return buf;
}

void write_transmission_csv(const std::filesystem::path& path,
                            const std::vector<TransmissionPoint>& sweep,
                            const Metadata& metadata) {
  auto out = open_out(path);
  write_metadata(out, metadata);
  out << "omega_hz,re_s21,im_s21,mag_db,phase_rad\n";
  for (const auto& p : sweep) {
    const double mag = std::abs(p.s21);
    out << format_number(p.omega / constants::two_pi) << "," << format_number(p.s21.real())
        << "," << format_number(p.s21.imag()) << ","
        << format_number(20.0 * std::log10(std::max(mag, 1e-300))) << ","
        << format_number(std::arg(p.s21)) << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const Metadata& metadata) {
  auto out = open_out(path);
  write_metadata(out, metadata);
  out << "# seed = " << trajectory.seed << "\n";
  out << "# dt_s = " << format_number(trajectory.dt, 17) << "\n";
  out << "t_s,x_m\n";
  for (std::size_t i = 0; i < trajectory.samples.size(); ++i)
    out << format_number(static_cast<double>(i) * trajectory.dt) << ","
        << format_number(trajectory.samples[i]) << "\n";
}

void write_series_csv(const std::filesystem::path& path, const SpectrumSeries& series,
                      const std::string& value_column) {
  auto out = open_out(path);
  out << "# units = " << series.units << "\n";
  write_metadata(out, series.metadata);
  out << "nu_hz," << value_column << "\n";
  for (std::size_t i = 0; i < series.size(); ++i)
    out << format_number(series.frequency_hz[i]) << "," << format_number(series.values[i])
        << "\n";
}

void write_detected_csv(const std::filesystem::path& path, const DetectedSpectrum& spectrum) {
  auto out = open_out(path);
  write_metadata(out, spectrum.metadata);
  out << "# v0_v = " << format_number(spectrum.carrier.v0, 17) << "\n";
  out << "# s_min = " << format_number(spectrum.carrier.s_min, 17) << "\n";
  out << "nu_hz,s_v_q_v2hz\n";
  for (std::size_t i = 0; i < spectrum.frequency_hz.size(); ++i)
    out << format_number(spectrum.frequency_hz[i]) << "," << format_number(spectrum.s_v_q[i])
        << "\n";
}

void write_budget_csv(const std::filesystem::path& path, const std::vector<BudgetRow>& rows,
                      const Metadata& metadata) {
  auto out = open_out(path);
  write_metadata(out, metadata);
  out << "power_w,t_im_k,t_sat_k,sx_ratio_linear,force_sens_n_rthz\n";
  for (const auto& row : rows)
    out << format_number(row.power_w) << "," << format_number(row.budget.t_im) << ","
        << format_number(row.budget.t_sat) << "," << format_number(row.budget.sql_ratio_linear)
        << "," << format_number(row.budget.force_sensitivity) << "\n";
}

void write_projection_csv(const std::filesystem::path& path,
                          const std::vector<ProjectionRow>& rows, const Metadata& metadata) {
  auto out = open_out(path);
  write_metadata(out, metadata);
  out << "power_w,sx_sn,sx_ba,sx_amp,t_ba_k\n";
  for (const auto& row : rows)
    out << format_number(row.power) << "," << format_number(row.sx_sn) << ","
        << format_number(row.sx_ba) << "," << format_number(row.sx_amp) << ","
        << format_number(row.t_ba) << "\n";
}

void write_sweep_points_csv(const std::filesystem::path& path,
                            const std::vector<SweepPointRecord>& rows,
                            const Metadata& metadata) {
  auto out = open_out(path);
  write_metadata(out, metadata);
  out << "t_k,delta_omega_c_sq_rad2_s2,included,fit_converged,fit_center_hz,fit_fwhm_hz\n";
  for (const auto& row : rows)
    out << format_number(row.temperature_k) << "," << format_number(row.delta_omega_c_sq)
        << "," << (row.included ? 1 : 0) << "," << (row.fit_converged ? 1 : 0) << ","
        << format_number(row.fit_center_hz) << "," << format_number(row.fit_fwhm_hz) << "\n";
}

void write_report(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
  auto out = open_out(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
}

void write_residuals_csv(const std::filesystem::path& path, const SpectrumSeries& series,
                         const LorentzianFit& fit, bool sqrt_model, double lo_hz,
                         double hi_hz) {
  auto out = open_out(path);
  out << "nu_hz,observed,model,residual\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double nu = series.frequency_hz[i];
    if (nu < lo_hz || nu > hi_hz) continue;
    double model = fit.model(constants::two_pi * nu);
    if (sqrt_model) model = std::sqrt(std::max(model, 0.0));
    const double observed = series.values[i];
    out << format_number(nu) << "," << format_number(observed) << "," << format_number(model)
        << "," << format_number(observed - model) << "\n";
  }
}

SpectrumSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NumericalError("cannot open series file '" + path.string() + "'");
  SpectrumSeries series;
  series.units = "unknown";
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      // pick up a units tag when present
      const auto pos = line.find("units = ");
      if (pos != std::string::npos) series.units = line.substr(pos + 8);
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column-name row
      continue;
    }
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw NumericalError(path.string() + ":" + std::to_string(line_no) +
                           ": expected at least two comma-separated columns");
    try {
      series.frequency_hz.push_back(std::stod(a));
      series.values.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw NumericalError(path.string() + ":" + std::to_string(line_no) +
                           ": malformed number");
    }
  }
  series.validate();
  return series;
}

}  // namespace cavilab::io
