#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cavilab/cavity.hpp"
#include "cavilab/mechanics.hpp"
#include "cavilab/projection.hpp"
#include "cavilab/readout.hpp"
#include "cavilab/spectral.hpp"

namespace cavilab::io {

/// Deterministic shortest-ish formatting used by every CSV writer.
std::string format_number(double value, int precision = 12);

using Metadata = std::map<std::string, std::string>;

void write_transmission_csv(const std::filesystem::path& path,
                            const std::vector<TransmissionPoint>& sweep,
                            const Metadata& metadata);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const Metadata& metadata);

/// Generic series writer: '#' metadata lines, then "nu_hz,<value_column>".
void write_series_csv(const std::filesystem::path& path, const SpectrumSeries& series,
                      const std::string& value_column);

void write_detected_csv(const std::filesystem::path& path, const DetectedSpectrum& spectrum);

struct BudgetRow {
  double power_w;
  NoiseBudget budget;
};

void write_budget_csv(const std::filesystem::path& path, const std::vector<BudgetRow>& rows,
                      const Metadata& metadata);

void write_projection_csv(const std::filesystem::path& path,
                          const std::vector<ProjectionRow>& rows, const Metadata& metadata);

struct SweepPointRecord {
  double temperature_k;
  double delta_omega_c_sq;
  bool included;    ///< inside the calibration fit window
  bool fit_converged;
  double fit_center_hz;
  double fit_fwhm_hz;
};

void write_sweep_points_csv(const std::filesystem::path& path,
                            const std::vector<SweepPointRecord>& rows,
                            const Metadata& metadata);

/// Key = value report, keys emitted in insertion order.
void write_report(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, std::string>>& entries);

/// Residuals of a Lorentzian (or sqrt-Lorentzian) fit against a series.
void write_residuals_csv(const std::filesystem::path& path, const SpectrumSeries& series,
                         const LorentzianFit& fit, bool sqrt_model, double lo_hz,
                         double hi_hz);

/// Reads a series written by write_series_csv / write_detected_csv (or any
/// CSV whose first two columns are frequency in Hz and a value).
SpectrumSeries read_series_csv(const std::filesystem::path& path);

}  // namespace cavilab::io
