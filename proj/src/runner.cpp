#include "cavilab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"
#include "cavilab/rng.hpp"

namespace cavilab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t require_seed(const Scenario& scenario, const char* what) {
  if (!scenario.run.seed)
    throw ConfigError(std::string(what) + " is stochastic: [run] seed is required");
  return *scenario.run.seed;
}

double require_duration(const Scenario& scenario) {
  if (!scenario.run.duration_s || !(*scenario.run.duration_s > 0.0))
    throw ConfigError("[run] duration_s is required and must be > 0");
  return *scenario.run.duration_s;
}

void check_run_controls(const Scenario& scenario) {
  const double dt = scenario.dt();
  const double dt_max = langevin_max_dt(scenario.mode);
  if (dt > dt_max)
    throw ConfigError("[run] dt_ns exceeds the integrator stability bound " +
                      io::format_number(dt_max * 1e9, 6) + " ns for this mode");
  if (scenario.run.duration_s) {
    const double burn = langevin_burn_in(scenario.mode);
    if (!(*scenario.run.duration_s > burn))
      throw ConfigError("[run] duration_s must exceed the burn-in 5/gamma_m = " +
                        io::format_number(burn, 6) + " s");
  }
}

io::Metadata scenario_metadata(const Scenario& s) {
  io::Metadata m;
  m["omega_c_hz"] = io::format_number(s.cavity.omega_c / constants::two_pi);
  m["omega_m_hz"] = io::format_number(s.mode.omega_m / constants::two_pi);
  m["mass_kg"] = io::format_number(s.mode.mass);
  m["q_m"] = io::format_number(s.mode.q_m);
  m["temperature_k"] = io::format_number(s.mode.temperature_bath);
  m["g_rad_s_per_m"] = io::format_number(s.coupling.g);
  m["power_incident_w"] = io::format_number(s.cavity.power_incident);
  m["gain_factor"] = io::format_number(s.noise.gain_factor);
  return m;
}

json derived_quantities(const Scenario& s) {
  json d;
  d["q_total"] = total_quality_factor(s.cavity.q_int, s.cavity.q_ext);
  d["gamma_c_rad_s"] = cavity_linewidth(s.cavity);
  d["gamma_m_rad_s"] = s.mode.gamma_m();
  d["spring_constant_n_per_m"] = spring_constant(s.mode);
  d["x_zp_m"] = s.mode.x_zp();
  d["g_rad_s_per_m"] = s.coupling.g;
  d["s_min"] = s_min(s.cavity);
  d["quadrature_responsivity_v_per_rad_s"] =
      quadrature_responsivity(s.geometry(), s.cavity);
  d["sideband_filter_at_omega_m"] =
      sideband_filter_factor(s.mode.omega_m, cavity_linewidth(s.cavity));
  return d;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const Scenario& scenario)
      : start_(std::chrono::steady_clock::now()) {
    manifest_["tool"] = "cavilab";
    manifest_["version"] = CAVILAB_VERSION;
    manifest_["command"] = std::move(command);
    manifest_["config"] = serialize_scenario(scenario);
    manifest_["derived"] = derived_quantities(scenario);
    if (scenario.run.seed) manifest_["seed"] = *scenario.run.seed;
  }

  json& data() { return manifest_; }

  fs::path finish(const fs::path& out_dir, const std::vector<fs::path>& files) {
    json names = json::array();
    for (const auto& f : files) names.push_back(f.filename().string());
    manifest_["outputs"] = names;
    manifest_["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const fs::path path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot write manifest '" + path.string() + "'");
    out << manifest_.dump(2) << "\n";
    return path;
  }

 private:
  json manifest_;
  std::chrono::steady_clock::time_point start_;
};

void ensure_out_dir(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "'");
}

// Maps an estimated displacement PSD through the detection chain:
// signal into volts, plus phase-noise floors carrying the same periodogram
// statistics (segment count) as the estimate itself.
DetectedSpectrum detect_displacement_psd(const SpectrumSeries& s_x, const Scenario& scenario,
                                         int averages, std::uint64_t floor_seed) {
  const ReadoutGeometry geometry = scenario.geometry();
  const double responsivity = quadrature_responsivity(geometry, scenario.cavity);
  const double gamma_c = cavity_linewidth(scenario.cavity);
  const double v_car = geometry.carrier_voltage();
  const double gain2 = scenario.noise.gain_factor * scenario.noise.gain_factor;
  const double g2 = scenario.coupling.g * scenario.coupling.g;
  double phi_amp = 0.0;
  if (scenario.noise.t_n > 0.0)
    phi_amp = amplifier_phase_floor(scenario.noise.t_n,
                                    detector_power(scenario.cavity, geometry));

  DetectedSpectrum out{{}, {}, geometry, {}};
  Rng rng(floor_seed);
  out.frequency_hz.reserve(s_x.size());
  out.s_v_q.reserve(s_x.size());
  for (std::size_t i = 0; i < s_x.size(); ++i) {
    const double nu = s_x.frequency_hz[i];
    if (nu <= 0.0) continue;  // DC bin carries no carrier-referred meaning
    const double omega = constants::two_pi * nu;
    const double filter = sideband_filter_factor(omega, gamma_c);
    const double signal = gain2 * responsivity * responsivity * g2 * s_x.values[i] / filter;
    double floor = v_car * v_car *
                   (phi_amp + (scenario.noise.a_tls > 0.0
                                   ? tls_phase_noise(scenario.noise, nu)
                                   : 0.0));
    if (averages > 0 && floor > 0.0) {
      double deviate = 0.0;
      for (int a = 0; a < averages; ++a) deviate += rng.exponential();
      floor *= deviate / averages;
    }
    out.frequency_hz.push_back(nu);
    out.s_v_q.push_back(signal + floor);
  }
  out.metadata = s_x.metadata;
  return out;
}

struct TonePeak {
  double power_v2;  ///< integrated tone power above background (V^2)
  double background;
};

TonePeak extract_tone(const DetectedSpectrum& spectrum, double nu_tone, int averages) {
  const auto& f = spectrum.frequency_hz;
  if (f.size() < 8 || nu_tone < f.front() || nu_tone > f.back())
    throw NumericalError("drive tone lies outside the simulated grid");
  std::size_t bin = 0;
  double best = std::abs(f[0] - nu_tone);
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs(f[i] - nu_tone) < best) {
      best = std::abs(f[i] - nu_tone);
      bin = i;
    }
  std::vector<double> bg;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (i + 3 < bin || i > bin + 3) bg.push_back(spectrum.s_v_q[i]);
  std::nth_element(bg.begin(), bg.begin() + bg.size() / 2, bg.end());
  const double background = bg[bg.size() / 2];
  const double df = bin + 1 < f.size() ? f[bin + 1] - f[bin] : f[bin] - f[bin - 1];
  const double excess = spectrum.s_v_q[bin] - background;
  const double threshold = 5.0 * background / std::sqrt(std::max(averages, 1));
  if (!(excess > threshold) || !(excess > 0.0))
    throw NumericalError("undetectable drive peak at " + io::format_number(nu_tone, 6) +
                         " Hz");
  return {excess * df, background};
}

}  // namespace

CalibrationPoint calibrate_point(const Scenario& scenario, double temperature_k,
                                 std::uint64_t seed) {
  CalibrationPoint point;
  point.temperature_k = temperature_k;

  const MechanicalMode mode(scenario.mode.omega_m, scenario.mode.mass, scenario.mode.q_m,
                            temperature_k);
  Scenario local = scenario;
  local.mode = mode;

  const double duration = require_duration(scenario);
  const auto trajectory = simulate_langevin(mode, std::nullopt, duration, scenario.dt(),
                                            derive_seed(seed, 0), scenario.run.keep_every);
  auto s_x = welch_psd(trajectory, scenario.run.welch_segment, scenario.run.welch_overlap);
  const int segments = std::stoi(s_x.metadata.at("segments"));

  const auto detected = detect_displacement_psd(s_x, local, segments, derive_seed(seed, 1));
  const auto s_omega = volts_to_cavity_freq_psd(detected, scenario.cavity, scenario.geometry());

  const auto [lo, hi] = scenario.fit_window_hz();
  point.fit = fit_lorentzian(s_omega, lo, hi);
  if (!point.fit.converged) {
    point.failed = true;
    point.error = "Lorentzian fit did not converge";
    return point;
  }
  point.delta_omega_c_sq = integrate_lorentzian(point.fit);
  return point;
}

CalibrationResult calibrate_sweep(const Scenario& scenario, bool parallel) {
  if (scenario.sweep.temperatures_k.empty())
    throw ConfigError("[sweep] temperature_mk is required for calibration");
  const std::uint64_t master = require_seed(scenario, "calibration");
  check_run_controls(scenario);
  require_duration(scenario);

  const auto& temps = scenario.sweep.temperatures_k;
  CalibrationResult result;
  result.points.resize(temps.size());

  if (parallel) {
    std::vector<std::future<CalibrationPoint>> futures;
    futures.reserve(temps.size());
    for (std::size_t i = 0; i < temps.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&scenario, &temps, master, i] {
        return calibrate_point(scenario, temps[i], derive_seed(master, i));
      }));
    for (std::size_t i = 0; i < temps.size(); ++i) result.points[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < temps.size(); ++i)
      result.points[i] = calibrate_point(scenario, temps[i], derive_seed(master, i));
  }

  std::vector<TemperaturePoint> usable;
  for (auto& p : result.points) {
    if (p.failed) continue;
    usable.push_back({p.temperature_k, p.delta_omega_c_sq});
  }
  result.sweep = temperature_sweep_fit(usable, scenario.mode, scenario.sweep.min_fit_temp_k);
  for (auto& p : result.points)
    p.included = !p.failed && p.temperature_k >= scenario.sweep.min_fit_temp_k;
  return result;
}

BudgetPoint budget_point(const Scenario& scenario, double power_w,
                         double saturation_floor_k, std::uint64_t seed) {
  if (!(scenario.cavity.power_incident > 0.0))
    throw ConfigError("[cavity] power_pw must be > 0 to scale a power sweep");
  if (!(scenario.coupling.g > 0.0))
    throw ConfigError("budget requires a calibrated coupling ([coupling] g or geometry)");

  BudgetPoint point;
  point.power_w = power_w;
  const double t_base =
      scenario.sweep.base_temperature_k.value_or(scenario.mode.temperature_bath);
  point.beam_temperature_k = std::max(t_base, saturation_floor_k);

  const CavityParams cavity(scenario.cavity.omega_c, scenario.cavity.q_int,
                            scenario.cavity.q_ext, scenario.cavity.z_line, power_w);
  const double v0 = scenario.v0 * std::sqrt(power_w / scenario.cavity.power_incident);
  const MechanicalMode mode(scenario.mode.omega_m, scenario.mode.mass, scenario.mode.q_m,
                            point.beam_temperature_k);
  ReadoutGeometry geometry = ReadoutGeometry::on_resonance(cavity, v0);
  if (scenario.run.probe_detuned) geometry.detuning = mode.omega_m;

  const auto grid = scenario.grid_hz();
  const int averages = scenario.run.statistical ? scenario.run.averages : 0;
  const auto detected = forward_spectrum(mode, cavity, scenario.coupling, geometry,
                                         scenario.noise, grid, seed, averages);
  const auto s_omega = volts_to_cavity_freq_psd(detected, cavity, geometry);

  const double g2 = scenario.coupling.g * scenario.coupling.g;
  const bool all_zero =
      std::all_of(s_omega.values.begin(), s_omega.values.end(), [](double v) { return v == 0.0; });
  double t_im = 0.0;
  double t_sat = 0.0;
  if (!all_zero) {
    const auto [lo, hi] = scenario.fit_window_hz();
    point.fit = fit_lorentzian(s_omega, lo, hi);
    if (!point.fit.converged)
      throw NumericalError("budget fit failed at power " + io::format_number(power_w, 6) + " W");
    const double s_x_im = std::max(point.fit.background, 0.0) / g2;
    t_im = imprecision_temperature(s_x_im, scenario.mode);
    t_sat = integrate_lorentzian(point.fit) * scenario.mode.mass * scenario.mode.omega_m *
            scenario.mode.omega_m / (g2 * constants::k_b);
  }
  point.noise_budget = budget(t_im, std::max(t_sat, 0.0), scenario.mode);
  return point;
}

std::vector<BudgetPoint> budget_sweep(const Scenario& scenario, bool parallel) {
  const auto& powers = scenario.sweep.powers_w;
  if (powers.empty()) throw ConfigError("[sweep] power_pw is required for a budget run");
  const std::uint64_t master =
      scenario.run.statistical ? require_seed(scenario, "budget") : scenario.run.seed.value_or(0);

  auto floor_at = [&scenario](std::size_t i) -> double {
    const auto& sat = scenario.sweep.saturation_k;
    if (sat.empty()) return 0.0;
    return sat.size() == 1 ? sat[0] : sat[i];
  };

  std::vector<BudgetPoint> points(powers.size());
  if (parallel) {
    std::vector<std::future<BudgetPoint>> futures;
    futures.reserve(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&scenario, &powers, &floor_at, master, i] {
        return budget_point(scenario, powers[i], floor_at(i), derive_seed(master, i));
      }));
    for (std::size_t i = 0; i < powers.size(); ++i) points[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < powers.size(); ++i)
      points[i] = budget_point(scenario, powers[i], floor_at(i), derive_seed(master, i));
  }
  return points;
}

double calibrate_gain_via_drive(const Scenario& low_power, const Scenario& high_power) {
  if (!low_power.drive || !high_power.drive)
    throw ConfigError("gain calibration requires an electrostatic drive in both scenarios");
  const auto& dl = *low_power.drive;
  const auto& dh = *high_power.drive;
  if (dl.v_dc != dh.v_dc || dl.v_ac != dh.v_ac || dl.omega_drive != dh.omega_drive ||
      low_power.coupling.dcd_dx != high_power.coupling.dcd_dx)
    throw ConfigError("gain calibration requires identical drives in both scenarios");
  if (low_power.mode.omega_m != high_power.mode.omega_m ||
      low_power.mode.mass != high_power.mode.mass ||
      low_power.mode.q_m != high_power.mode.q_m ||
      low_power.coupling.g != high_power.coupling.g)
    throw ConfigError("gain calibration requires the same beam and coupling in both scenarios");

  auto detect = [](const Scenario& s, const char* what) {
    const std::uint64_t seed = require_seed(s, what);
    const int averages = s.run.statistical ? s.run.averages : 0;
    return forward_spectrum(s.mode, s.cavity, s.coupling, s.geometry(), s.noise, s.grid_hz(),
                            seed, averages, s.electrostatic_drive());
  };
  const auto spec_lo = detect(low_power, "gain calibration (low)");
  const auto spec_hi = detect(high_power, "gain calibration (high)");

  const double nu_tone = dl.omega_drive / constants::two_pi;
  const auto peak_lo =
      extract_tone(spec_lo, nu_tone, low_power.run.statistical ? low_power.run.averages : 0);
  const auto peak_hi =
      extract_tone(spec_hi, nu_tone, high_power.run.statistical ? high_power.run.averages : 0);

  // Divide out every known scaling (responsivity and cavity filtering); what
  // remains of the peak ratio is the gain factor squared.
  const double gamma_lo = cavity_linewidth(low_power.cavity);
  const double gamma_hi = cavity_linewidth(high_power.cavity);
  const double r_lo = quadrature_responsivity(low_power.geometry(), low_power.cavity);
  const double r_hi = quadrature_responsivity(high_power.geometry(), high_power.cavity);
  const double known = (r_hi * r_hi / sideband_filter_factor(dl.omega_drive, gamma_hi)) /
                       (r_lo * r_lo / sideband_filter_factor(dl.omega_drive, gamma_lo));
  return low_power.noise.gain_factor *
         std::sqrt(peak_hi.power_v2 / peak_lo.power_v2 / known);
}

RunOutputs run_simulate(const Scenario& scenario, const fs::path& out_dir) {
  const std::uint64_t seed = require_seed(scenario, "simulate");
  check_run_controls(scenario);
  const double duration = require_duration(scenario);

  ManifestWriter manifest("simulate", scenario);
  const auto trajectory =
      simulate_langevin(scenario.mode, scenario.electrostatic_drive(), duration,
                        scenario.dt(), derive_seed(seed, 0), scenario.run.keep_every);
  if (scenario.run.welch_segment > trajectory.samples.size())
    throw ConfigError("[run] welch_segment (" + std::to_string(scenario.run.welch_segment) +
                      ") exceeds the " + std::to_string(trajectory.samples.size()) +
                      " retained samples");
  const auto s_x =
      welch_psd(trajectory, scenario.run.welch_segment, scenario.run.welch_overlap);
  const int averages = scenario.run.statistical ? scenario.run.averages : 0;
  const auto detected =
      forward_spectrum(scenario.mode, scenario.cavity, scenario.coupling, scenario.geometry(),
                       scenario.noise, scenario.grid_hz(), derive_seed(seed, 1), averages,
                       scenario.electrostatic_drive());

  const double gamma_c = cavity_linewidth(scenario.cavity);
  const auto cavity_sweep = transmission_sweep(
      scenario.cavity, scenario.cavity.omega_c - 8.0 * gamma_c,
      scenario.cavity.omega_c + 8.0 * gamma_c, 801);

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;
  auto meta = scenario_metadata(scenario);
  meta["master_seed"] = std::to_string(seed);

  const fs::path cavity_path = out_dir / "cavity_response.csv";
  io::write_transmission_csv(cavity_path, cavity_sweep, meta);
  outputs.files.push_back(cavity_path);

  const fs::path traj_path = out_dir / "trajectory.csv";
  io::write_trajectory_csv(traj_path, trajectory, meta);
  outputs.files.push_back(traj_path);

  const fs::path psd_path = out_dir / "displacement_psd.csv";
  io::write_series_csv(psd_path, s_x, "s_x_m2hz");
  outputs.files.push_back(psd_path);

  const fs::path det_path = out_dir / "detected_spectrum.csv";
  DetectedSpectrum annotated = detected;
  for (const auto& [k, v] : meta) annotated.metadata.emplace(k, v);
  io::write_detected_csv(det_path, annotated);
  outputs.files.push_back(det_path);

  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

RunOutputs run_calibrate(const Scenario& scenario, const fs::path& out_dir) {
  ManifestWriter manifest("calibrate", scenario);
  const auto result = calibrate_sweep(scenario);

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;

  std::vector<io::SweepPointRecord> records;
  for (const auto& p : result.points)
    records.push_back({p.temperature_k, p.delta_omega_c_sq, p.included, !p.failed,
                       p.fit.center / constants::two_pi, p.fit.fwhm_gamma / constants::two_pi});
  auto meta = scenario_metadata(scenario);
  meta["min_fit_temp_k"] = io::format_number(scenario.sweep.min_fit_temp_k);
  const fs::path points_path = out_dir / "calibration_points.csv";
  io::write_sweep_points_csv(points_path, records, meta);
  outputs.files.push_back(points_path);

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("g_rad_s_per_m", io::format_number(result.sweep.g_fit));
  report.emplace_back("g_khz_per_nm",
                      io::format_number(result.sweep.g_fit / (constants::two_pi * 1e12)));
  report.emplace_back("t_intercept_k", io::format_number(result.sweep.t_intercept));
  report.emplace_back("slope_rad2_s2_per_k", io::format_number(result.sweep.slope));
  report.emplace_back("intercept_rad2_s2", io::format_number(result.sweep.intercept));
  report.emplace_back("fit_window_min_temp_k",
                      io::format_number(result.sweep.fit_window_min_temp));
  report.emplace_back("points_total", std::to_string(result.points.size()));
  report.emplace_back("points_used", std::to_string(result.sweep.used_indices.size()));
  int excluded = 0;
  for (const auto& p : result.points)
    if (!p.included) ++excluded;
  report.emplace_back("points_excluded", std::to_string(excluded));
  for (const auto& p : result.points)
    if (p.failed)
      report.emplace_back("failure_at_" + io::format_number(p.temperature_k, 6) + "_k",
                          p.error);
  const fs::path report_path = out_dir / "calibration_report.txt";
  io::write_report(report_path, report);
  outputs.files.push_back(report_path);

  manifest.data()["g_rad_s_per_m"] = result.sweep.g_fit;
  manifest.data()["t_intercept_k"] = result.sweep.t_intercept;
  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

RunOutputs run_budget(const Scenario& scenario, const fs::path& out_dir) {
  ManifestWriter manifest("budget", scenario);
  const auto points = budget_sweep(scenario);

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;

  std::vector<io::BudgetRow> rows;
  for (const auto& p : points) rows.push_back({p.power_w, p.noise_budget});
  auto meta = scenario_metadata(scenario);
  const fs::path budget_path = out_dir / "budget.csv";
  io::write_budget_csv(budget_path, rows, meta);
  outputs.files.push_back(budget_path);

  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

RunOutputs run_project(const Scenario& scenario, const fs::path& out_dir) {
  if (scenario.sweep.powers_w.empty())
    throw ConfigError("[sweep] power_pw is required for a projection run");
  if (!std::isinf(scenario.cavity.q_int))
    throw ConfigError("projection requires a lossless cavity ([cavity] q_int = lossless)");
  ManifestWriter manifest("project", scenario);
  const ProjectionScenario projection(scenario.cavity, scenario.mode, scenario.coupling.g,
                                      scenario.noise.t_n, scenario.sweep.powers_w);
  const auto rows = projection_table(projection);
  const double p_star = intersection_power(projection);
  const auto minimum = minimum_total_uncertainty(projection);

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;

  auto meta = scenario_metadata(scenario);
  meta["t_n_k"] = io::format_number(scenario.noise.t_n);
  const fs::path table_path = out_dir / "projection.csv";
  io::write_projection_csv(table_path, rows, meta);
  outputs.files.push_back(table_path);

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("intersection_power_w", io::format_number(p_star));
  report.emplace_back("amplifier_noise_number",
                      io::format_number(amplifier_noise_number(projection)));
  report.emplace_back("minimum_uncertainty_power_w", io::format_number(minimum.power));
  report.emplace_back("minimum_linear_ratio_to_sql",
                      io::format_number(minimum.linear_ratio_to_sql));
  const fs::path report_path = out_dir / "projection_report.txt";
  io::write_report(report_path, report);
  outputs.files.push_back(report_path);

  manifest.data()["intersection_power_w"] = p_star;
  manifest.data()["minimum_linear_ratio_to_sql"] = minimum.linear_ratio_to_sql;
  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

RunOutputs run_gaincal(const Scenario& low_power, const Scenario& high_power,
                       const fs::path& out_dir) {
  ManifestWriter manifest("gaincal", low_power);
  const double gain = calibrate_gain_via_drive(low_power, high_power);

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("gain_factor_estimate", io::format_number(gain));
  report.emplace_back("low_power_w", io::format_number(low_power.cavity.power_incident));
  report.emplace_back("high_power_w", io::format_number(high_power.cavity.power_incident));
  report.emplace_back("trusted_low_gain", io::format_number(low_power.noise.gain_factor));
  const fs::path report_path = out_dir / "gaincal_report.txt";
  io::write_report(report_path, report);
  outputs.files.push_back(report_path);

  manifest.data()["config_high"] = serialize_scenario(high_power);
  manifest.data()["gain_factor_estimate"] = gain;
  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

RunOutputs run_fit(const Scenario& scenario,
                   const std::optional<fs::path>& input_csv, bool sqrt_model,
                   const fs::path& out_dir) {
  ManifestWriter manifest("fit", scenario);

  SpectrumSeries series;
  if (input_csv) {
    series = io::read_series_csv(*input_csv);
    manifest.data()["input"] = input_csv->string();
  } else {
    const std::uint64_t seed = require_seed(scenario, "fit (synthetic spectrum)");
    const int averages = scenario.run.statistical ? scenario.run.averages : 0;
    const auto detected =
        forward_spectrum(scenario.mode, scenario.cavity, scenario.coupling,
                         scenario.geometry(), scenario.noise, scenario.grid_hz(), seed,
                         averages, scenario.electrostatic_drive());
    series.frequency_hz = detected.frequency_hz;
    series.values = detected.s_v_q;
    series.units = "V^2/Hz";
    series.metadata = detected.metadata;
  }

  const auto [lo, hi] = scenario.fit_window_hz();
  const LorentzianFit fit =
      sqrt_model ? fit_sqrt_lorentzian(series, lo, hi) : fit_lorentzian(series, lo, hi);
  if (!fit.converged) throw NumericalError("fit did not converge");

  ensure_out_dir(out_dir);
  RunOutputs outputs;
  outputs.out_dir = out_dir;

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("model", sqrt_model ? "sqrt_lorentzian" : "lorentzian");
  report.emplace_back("center_hz", io::format_number(fit.center / constants::two_pi));
  report.emplace_back("fwhm_hz", io::format_number(fit.fwhm_gamma / constants::two_pi));
  report.emplace_back("peak", io::format_number(fit.peak));
  report.emplace_back("background", io::format_number(fit.background));
  report.emplace_back("integrated_peak", io::format_number(integrate_lorentzian(fit)));
  report.emplace_back("iterations", std::to_string(fit.iterations));
  report.emplace_back("chi2", io::format_number(fit.chi2));
  for (int i = 0; i < 4; ++i) {
    std::ostringstream row;
    for (int j = 0; j < 4; ++j) {
      if (j) row << " ";
      row << io::format_number(fit.covariance[static_cast<std::size_t>(i * 4 + j)], 6);
    }
    report.emplace_back("covariance_row_" + std::to_string(i), row.str());
  }
  const fs::path report_path = out_dir / "fit_report.txt";
  io::write_report(report_path, report);
  outputs.files.push_back(report_path);

  const fs::path residuals_path = out_dir / "fit_residuals.csv";
  io::write_residuals_csv(residuals_path, series, fit, sqrt_model, lo, hi);
  outputs.files.push_back(residuals_path);

  outputs.manifest = manifest.finish(out_dir, outputs.files);
  return outputs;
}

}  // namespace cavilab
