// Acceptance suite: one line per criterion, nonzero exit on any failure.
// argv[1] points at the shipped configs/ directory.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cavilab/constants.hpp"
#include "cavilab/projection.hpp"
#include "cavilab/runner.hpp"
#include "cavilab/scenario.hpp"

using namespace cavilab;
namespace fs = std::filesystem;

namespace {

constexpr double two_pi = constants::two_pi;

fs::path g_configs;

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

CavityParams notch_cavity() { return {two_pi * 5e9, 38000.0, 14000.0, 70.0, 68e-12}; }
MechanicalMode beam(double t) { return {two_pi * 240e3, 2e-15, 2300.0, t}; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Check {
  int id;
  const char* name;
  std::function<std::string()> run;  // returns detail text; throws on failure
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& detail) {
  if (!ok) throw Failure(detail);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

std::string coupling_chain() {
  const double g = coupling_from_geometry(1.7e-10, notch_cavity());
  const double g_khz_nm = g / (two_pi * 1e12);
  expect(rel_err(g_khz_nm, 1.19) < 0.005, fmt("geometric pull %.4f kHz/nm != 1.19", g_khz_nm));
  expect(rel_err(g_khz_nm, 1.16) < 0.05,
         fmt("pull %.4f kHz/nm not within 5%% of the 1.16 thermal calibration", g_khz_nm));
  return fmt("g = 2pi x %.3f kHz/nm, within %.1f%% of the 1.16 thermal value", g_khz_nm,
             100.0 * rel_err(g_khz_nm, 1.16));
}

std::string quality_factor_chain() {
  const double q = total_quality_factor(38000.0, 14000.0);
  expect(std::lround(q) == 10231, fmt("Q = %.2f rounds away from 10231", q));
  expect(rel_err(q, 10000.0) < 0.03, fmt("Q = %.1f not within 3%% of 10,000", q));
  const double gamma_c = cavity_linewidth(notch_cavity());
  expect(rel_err(gamma_c, two_pi * 489e3) < 0.002,
         fmt("gamma_c = 2pi x %.1f kHz != 489 kHz", gamma_c / two_pi / 1e3));
  expect(rel_err(gamma_c, two_pi * 490e3) < 0.03, "gamma_c not within 3% of 2pi x 490 kHz");
  return fmt("Q = %.0f, gamma_c = 2pi x %.1f kHz", q, gamma_c / two_pi / 1e3);
}

std::string hemt_quanta() {
  const double quanta = amplifier_quanta(7.5, two_pi * 5e9);
  expect(rel_err(quanta, 31.2) < 0.01, fmt("quanta %.3f != 31.2", quanta));
  expect(rel_err(quanta, 30.0) < 0.05, fmt("quanta %.3f not within 5%% of 30", quanta));
  return fmt("k_b T_N / hbar omega_c = %.2f (nominal: 30)", quanta);
}

std::string sql_distance() {
  const auto mode = beam(0.1);
  const auto b = budget(imprecision_temperature(4e-26, mode), 0.0, mode);
  const double sqrt_sql_fm = std::sqrt(b.s_x_sql) * 1e15;
  expect(rel_err(sqrt_sql_fm, 7.3) < 0.01, fmt("sqrt(S_SQL) = %.3f fm != 7.3", sqrt_sql_fm));
  expect(rel_err(b.sql_ratio_linear, 30.0) < 0.15,
         fmt("linear ratio %.2f not within 15%% of 30", b.sql_ratio_linear));
  return fmt("sqrt(S_SQL) = %.2f fm/rtHz; 200 fm/rtHz imprecision = %.1f x SQL", sqrt_sql_fm,
             b.sql_ratio_linear);
}

std::string projection_crossing() {
  const auto scenario = load_scenario(g_configs / "projection_optimized.cfg");
  const ProjectionScenario projection(scenario.cavity, scenario.mode, scenario.coupling.g,
                                      scenario.noise.t_n, scenario.sweep.powers_w);
  const double p_star = intersection_power(projection);
  expect(rel_err(p_star, 600e-12) < 0.05,
         fmt("crossing at %.1f pW, not within 5%% of 600 pW", p_star * 1e12));
  return fmt("shot noise and backaction cross at %.0f pW", p_star * 1e12);
}

std::string minimum_uncertainty_factor() {
  const auto scenario = load_scenario(g_configs / "projection_optimized.cfg");
  const ProjectionScenario projection(scenario.cavity, scenario.mode, scenario.coupling.g,
                                      scenario.noise.t_n, scenario.sweep.powers_w);
  const auto minimum = minimum_total_uncertainty(projection);
  expect(rel_err(minimum.linear_ratio_to_sql, 2.04) < 0.05,
         fmt("minimum factor %.4f not within 5%% of 2.04", minimum.linear_ratio_to_sql));
  return fmt("5 K amplifier minimum: %.3f x SQL in linear units", minimum.linear_ratio_to_sql);
}

std::string force_sensitivity() {
  const auto mode = beam(0.1);
  for (const double t_sum : {0.10, 0.115, 0.13}) {
    const double sens = budget(t_sum, 0.0, mode).force_sensitivity;
    const double ratio = sens / 3e-18;
    expect(ratio > 1.0 / 1.6 && ratio < 1.6,
           fmt("sqrt(S_F) = %.2f aN at %.0f mK outside factor 1.6 of 3 aN", sens * 1e18,
               t_sum * 1e3));
  }
  const double mid = budget(0.115, 0.0, mode).force_sensitivity;
  return fmt("sqrt(S_F) = %.2f aN/rtHz at T_im+T_sat = 115 mK (nominal: 3)", mid * 1e18);
}

std::string equipartition() {
  const auto mode = beam(0.1);
  const double dt = two_pi / (300.0 * mode.omega_m);
  const double duration = 200.0 / mode.gamma_m() + langevin_burn_in(mode);
  const auto traj = simulate_langevin(mode, std::nullopt, duration, dt, 1, 30);
  const double mean =
      std::accumulate(traj.samples.begin(), traj.samples.end(), 0.0) / traj.samples.size();
  double var = 0.0;
  for (const double x : traj.samples) var += (x - mean) * (x - mean);
  var /= traj.samples.size();
  const double expected = constants::k_b * 0.1 / (mode.mass * mode.omega_m * mode.omega_m);
  expect(rel_err(var, expected) < 0.05,
         fmt("variance %.3e vs equipartition %.3e (%.1f%%)", var, expected,
             100.0 * rel_err(var, expected)));
  return fmt("trajectory variance within %.1f%% of k_b T / (m omega_m^2)",
             100.0 * rel_err(var, expected));
}

std::string spectral_oracle() {
  const auto mode = beam(0.1);
  const double dt = two_pi / (300.0 * mode.omega_m);
  const int keep = 60;
  const double fs_kept = 1.0 / (dt * keep);
  const std::size_t segment = 131072;
  const double duration = 101.0 * segment / (2.0 * fs_kept) + langevin_burn_in(mode);
  const auto traj = simulate_langevin(mode, std::nullopt, duration, dt, 27, keep);
  const auto psd = welch_psd(traj, segment, 0.5);
  expect(psd.metadata.at("segments") == "100", "expected a 100-segment average");

  const double f_m = mode.omega_m / two_pi;
  const double fwhm_hz = mode.gamma_m() / two_pi;
  std::size_t centre = 0;
  for (std::size_t i = 1; i < psd.size(); ++i)
    if (std::abs(psd.frequency_hz[i] - f_m) < std::abs(psd.frequency_hz[centre] - f_m))
      centre = i;
  const double peak_expected =
      thermal_displacement_psd(mode, two_pi * psd.frequency_hz[centre] - mode.omega_m);
  const double peak_err = rel_err(psd.values[centre], peak_expected);
  expect(peak_err < 0.10, fmt("peak bin off by %.1f%%", 100.0 * peak_err));

  // twelve sub-bands across +-3 gamma_m, each within 15 %
  double worst = 0.0;
  for (int band = 0; band < 12; ++band) {
    const double lo = f_m - 3.0 * fwhm_hz + 6.0 * fwhm_hz * band / 12.0;
    const double hi = lo + 6.0 * fwhm_hz / 12.0;
    double est = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < psd.size(); ++i) {
      if (psd.frequency_hz[i] < lo || psd.frequency_hz[i] >= hi) continue;
      est += psd.values[i];
      ref += thermal_displacement_psd(mode, two_pi * psd.frequency_hz[i] - mode.omega_m);
    }
    worst = std::max(worst, rel_err(est, ref));
  }
  expect(worst < 0.15, fmt("sub-band deviation %.1f%% across +-3 gamma", 100.0 * worst));
  return fmt("peak within %.1f%%, worst +-3-gamma sub-band within %.1f%%", 100.0 * peak_err,
             100.0 * worst);
}

std::string pipeline_round_trip() {
  // exact inverse on a noiseless forward map
  const auto cavity = notch_cavity();
  const auto mode = beam(0.1);
  const auto coupling = CouplingModel::from_geometry(1.7e-10, 2e-13, cavity);
  const auto geometry = ReadoutGeometry::on_resonance(cavity, 1.0);
  const NoiseModel quiet(0.0, 0.0);
  std::vector<double> grid;
  for (int i = 0; i < 801; ++i) grid.push_back(238e3 + 4.0 * i);
  const auto detected = forward_spectrum(mode, cavity, coupling, geometry, quiet, grid, 1, 0);
  const auto recovered = volts_to_cavity_freq_psd(detected, cavity, geometry);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = coupling.g * coupling.g *
                            thermal_displacement_psd(mode, two_pi * grid[i] - mode.omega_m);
    worst = std::max(worst, rel_err(recovered.values[i], expected));
  }
  expect(worst < 1e-9, fmt("round-trip error %.2e exceeds 1e-9", worst));

  // stochastic end-to-end calibration recovers the generating coupling
  const auto scenario = load_scenario(g_configs / "beam_240khz.cfg");
  const auto result = calibrate_sweep(scenario);
  const double g_err = rel_err(result.sweep.g_fit, scenario.coupling.g);
  expect(g_err < 0.05, fmt("calibrated g off by %.2f%%", 100.0 * g_err));
  return fmt("inverse exact to %.1e; calibration recovers g within %.2f%%", worst,
             100.0 * g_err);
}

std::string identity_checks() {
  const auto scenario = load_scenario(g_configs / "projection_optimized.cfg");
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(1e-12 * std::pow(10.0, 4.0 * i / 49.0));
  const ProjectionScenario projection(scenario.cavity, scenario.mode, scenario.coupling.g,
                                      scenario.noise.t_n, grid);
  double worst = 0.0;
  for (const double p : grid) {
    const double product =
        shot_noise_imprecision(projection, p) * quantum_backaction_force(projection, p);
    worst = std::max(worst, rel_err(product, constants::hbar * constants::hbar));
  }
  expect(worst < 1e-12, fmt("uncertainty product off by %.2e", worst));

  // Heisenberg consistency of every measured budget row: the imprecision PSD
  // times the force PSD equivalent of the saturation temperature
  const auto budget_scenario = load_scenario(g_configs / "beam_240khz.cfg");
  const auto rows = budget_sweep(budget_scenario);
  expect(!rows.empty(), "no budget rows");
  for (const auto& row : rows) {
    const double s_f_sat = 4.0 * constants::k_b * row.noise_budget.t_sat *
                           budget_scenario.mode.mass * budget_scenario.mode.gamma_m();
    expect(row.noise_budget.s_x_im * s_f_sat >= constants::hbar * constants::hbar,
           fmt("budget row at %.0f pW violates the Heisenberg bound", row.power_w * 1e12));
  }
  return fmt("S_x^sn S_F^ba = hbar^2 to %.1e over 50 powers; ", worst) +
         std::to_string(rows.size()) + " budget rows consistent";
}

std::string determinism() {
  auto scenario = load_scenario(g_configs / "beam_240khz.cfg");
  scenario.run.duration_s = 0.03;  // short but past burn-in
  scenario.run.welch_segment = 8192;
  scenario.raw["run"]["duration_s"] = "0.03";
  scenario.raw["run"]["welch_segment"] = "8192";

  const fs::path base = fs::temp_directory_path() / "cavilab_acceptance";
  fs::remove_all(base);
  const auto out_a = run_simulate(scenario, base / "a");
  const auto out_b = run_simulate(scenario, base / "b");
  for (std::size_t i = 0; i < out_a.files.size(); ++i)
    expect(slurp(out_a.files[i]) == slurp(out_b.files[i]),
           "identical seeds produced different CSV bodies");

  // sweep results do not depend on execution order / parallel fan-out
  auto sweep_scenario = load_scenario(g_configs / "beam_240khz.cfg");
  sweep_scenario.run.duration_s = 0.08;
  sweep_scenario.run.welch_segment = 16384;
  sweep_scenario.sweep.temperatures_k = {0.13, 0.2, 0.26, 0.3};
  const auto parallel = calibrate_sweep(sweep_scenario, true);
  const auto serial = calibrate_sweep(sweep_scenario, false);
  for (std::size_t i = 0; i < parallel.points.size(); ++i)
    expect(parallel.points[i].delta_omega_c_sq == serial.points[i].delta_omega_c_sq,
           "parallel and serial sweeps disagree");
  fs::remove_all(base);
  return "byte-identical reruns; order-independent sweeps";
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? fs::path(argv[1]) : fs::path("configs");

  const std::vector<Check> checks = {
      {1, "coupling chain from geometry", coupling_chain},
      {2, "quality-factor arithmetic", quality_factor_chain},
      {3, "HEMT amplifier quanta", hemt_quanta},
      {4, "SQL distance of the measured imprecision", sql_distance},
      {5, "projection crossing power", projection_crossing},
      {6, "minimum-uncertainty factor", minimum_uncertainty_factor},
      {7, "force-sensitivity consistency", force_sensitivity},
      {8, "equipartition of the Langevin trajectory", equipartition},
      {9, "Welch spectrum matches the thermal lineshape", spectral_oracle},
      {10, "pipeline round-trip and coupling recovery", pipeline_round_trip},
      {11, "uncertainty-product and Heisenberg identities", identity_checks},
      {12, "determinism and order independence", determinism},
  };

  int failures = 0;
  for (const auto& check : checks) {
    std::string detail;
    bool ok = true;
    try {
      detail = check.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("%s  criterion %02d: %s — %s\n", ok ? "PASS" : "FAIL", check.id, check.name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all %zu criteria passed\n", checks.size());
  return failures == 0 ? 0 : 1;
}
