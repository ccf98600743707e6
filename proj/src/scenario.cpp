#include "cavilab/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"

namespace cavilab {

namespace {

constexpr double ghz_to_rad_s = 1e9 * constants::two_pi;
constexpr double khz_to_rad_s = 1e3 * constants::two_pi;
constexpr double khz_per_nm_to_rad_s_per_m = 1e12 * constants::two_pi;
constexpr double af_per_um_to_f_per_m = 1e-12;

const std::array<const char*, 7> section_order = {
    "cavity", "mechanics", "coupling", "noise", "drive", "run", "sweep"};

const std::map<std::string, std::vector<std::string>> known_keys = {
    {"cavity", {"omega_c_ghz", "q_int", "q_ext", "z_line_ohm", "power_pw", "v0_v"}},
    {"mechanics", {"omega_m_khz", "mass_pg", "q_m", "temperature_mk"}},
    {"coupling", {"dcb_dx_af_um", "dcd_dx_af_um", "g_khz_per_nm"}},
    {"noise", {"t_n_k", "a_tls_rad2_at_1hz", "tls_exponent", "gain_factor"}},
    {"drive", {"v_dc_v", "v_ac_mv", "omega_drive_khz"}},
    {"run",
     {"seed", "duration_s", "dt_ns", "keep_every", "averages", "statistical",
      "grid_min_khz", "grid_max_khz", "grid_points", "welch_segment", "welch_overlap",
      "fit_window_min_khz", "fit_window_max_khz", "probe"}},
    {"sweep",
     {"power_pw", "temperature_mk", "min_fit_temp_mk", "saturation_mk",
      "base_temperature_mk"}}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
};

using RawConfig = std::map<std::string, std::map<std::string, RawEntry>>;

class Reader {
 public:
  Reader(const RawConfig& raw, std::string source) : raw_(raw), source_(std::move(source)) {}

  bool has(const std::string& section, const std::string& key) const {
    const auto s = raw_.find(section);
    return s != raw_.end() && s->second.count(key) > 0;
  }

  bool has_section(const std::string& section) const { return raw_.count(section) > 0; }

  const RawEntry& entry(const std::string& section, const std::string& key) const {
    const auto s = raw_.find(section);
    if (s == raw_.end() || !s->second.count(key))
      throw ConfigError(source_ + ": missing required key '" + key + "' in [" + section + "]");
    return s->second.at(key);
  }

  double number(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    return to_double(e.value, e.line, key);
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  std::optional<double> maybe_number(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return number(section, key);
  }

  long integer(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    const double v = to_double(e.value, e.line, key);
    if (v != std::floor(v))
      throw ConfigError(source_, e.line, "key '" + key + "' must be an integer");
    return static_cast<long>(v);
  }

  std::uint64_t unsigned64(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (errno != 0 || end == e.value.c_str() || *end != '\0')
      throw ConfigError(source_, e.line, "key '" + key + "' must be a non-negative integer");
    return v;
  }

  bool boolean(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ConfigError(source_, e.line, "key '" + key + "' must be 'true' or 'false'");
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ConfigError(source_, e.line, "empty element in list '" + key + "'");
      out.push_back(to_double(item, e.line, key));
    }
    if (out.empty()) throw ConfigError(source_, e.line, "empty list for key '" + key + "'");
    return out;
  }

  double to_double(const std::string& text, int line, const std::string& key) const {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (errno != 0 || end == text.c_str() || *end != '\0')
      throw ConfigError(source_, line, "key '" + key + "' has a malformed number '" + text + "'");
    return v;
  }

  void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    const auto s = raw_.find(section);
    if (s != raw_.end()) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) throw ConfigError(source_, k->second.line, msg);
    }
    throw ConfigError(source_ + ": " + msg);
  }

  const std::string& source() const { return source_; }

 private:
  const RawConfig& raw_;
  std::string source_;
};

RawConfig tokenize(const std::string& text, const std::string& source) {
  RawConfig raw;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(source, line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys.count(section))
        throw ConfigError(source, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source, line_no, "expected 'key = value', got '" + line + "'");
    if (section.empty())
      throw ConfigError(source, line_no, "key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = known_keys.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(source, line_no, "unknown key '" + key + "' in [" + section + "]");
    if (value.empty())
      throw ConfigError(source, line_no, "key '" + key + "' has no value");
    if (raw[section].count(key))
      throw ConfigError(source, line_no, "duplicate key '" + key + "' in [" + section + "]");
    raw[section][key] = {value, line_no};
  }
  return raw;
}

}  // namespace

Scenario::Scenario(CavityParams cavity_, double v0_, MechanicalMode mode_,
                   CouplingModel coupling_, NoiseModel noise_,
                   std::optional<DriveSpec> drive_, RunControls run_, SweepAxes sweep_)
    : cavity(cavity_),
      v0(v0_),
      mode(mode_),
      coupling(coupling_),
      noise(noise_),
      drive(std::move(drive_)),
      run(std::move(run_)),
      sweep(std::move(sweep_)) {
  if (!(std::isfinite(v0) && v0 > 0.0))
    throw std::invalid_argument("Scenario: v0 must be > 0");
}

ReadoutGeometry Scenario::geometry() const {
  ReadoutGeometry g = ReadoutGeometry::on_resonance(cavity, v0);
  if (run.probe_detuned) g.detuning = mode.omega_m;
  return g;
}

std::optional<ElectrostaticDrive> Scenario::electrostatic_drive() const {
  if (!drive) return std::nullopt;
  return ElectrostaticDrive{*drive, coupling.dcd_dx};
}

double Scenario::dt() const {
  if (run.dt_s) return *run.dt_s;
  return constants::two_pi / (300.0 * mode.omega_m);
}

std::vector<double> Scenario::grid_hz() const {
  const double fwhm_hz = mode.gamma_m() / constants::two_pi;
  const double center = mode.omega_m / constants::two_pi;
  const double lo = run.grid_min_hz.value_or(center - 10.0 * fwhm_hz);
  const double hi = run.grid_max_hz.value_or(center + 10.0 * fwhm_hz);
  if (!(lo > 0.0 && hi > lo))
    throw ConfigError("grid bounds must satisfy 0 < min < max");
  const int n = run.grid_points;
  if (n < 2) throw ConfigError("grid_points must be >= 2");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo + step * i;
  return grid;
}

std::pair<double, double> Scenario::fit_window_hz() const {
  const double fwhm_hz = mode.gamma_m() / constants::two_pi;
  const double center = mode.omega_m / constants::two_pi;
  const double lo = run.fit_window_min_hz.value_or(center - 8.0 * fwhm_hz);
  const double hi = run.fit_window_max_hz.value_or(center + 8.0 * fwhm_hz);
  if (!(hi > lo)) throw ConfigError("fit window must satisfy min < max");
  return {lo, hi};
}

Scenario parse_scenario(const std::string& text, const std::string& source_name) {
  const RawConfig raw = tokenize(text, source_name);
  const Reader r(raw, source_name);

  for (const char* required : {"cavity", "mechanics", "coupling"})
    if (!r.has_section(required))
      throw ConfigError(source_name + ": missing required section [" + std::string(required) + "]");

  // [cavity]
  double q_int = 0.0;
  {
    const auto& e = r.entry("cavity", "q_int");
    q_int = (e.value == "lossless") ? lossless_q : r.to_double(e.value, e.line, "q_int");
  }
  double q_ext = 0.0;
  {
    const auto& e = r.entry("cavity", "q_ext");
    q_ext = (e.value == "lossless") ? lossless_q : r.to_double(e.value, e.line, "q_ext");
  }

  try {
    const CavityParams cavity(r.number("cavity", "omega_c_ghz") * ghz_to_rad_s, q_int, q_ext,
                              r.number("cavity", "z_line_ohm"),
                              r.number("cavity", "power_pw") * 1e-12);
    const double v0 = r.number("cavity", "v0_v");

    const MechanicalMode mode(r.number("mechanics", "omega_m_khz") * khz_to_rad_s,
                              r.number("mechanics", "mass_pg") * 1e-15,
                              r.number("mechanics", "q_m"),
                              r.number("mechanics", "temperature_mk") * 1e-3);

    // [coupling] — one construction route, so the stored g stays consistent
    // with how it was obtained.
    const bool has_dcb = r.has("coupling", "dcb_dx_af_um");
    const bool has_g = r.has("coupling", "g_khz_per_nm");
    if (has_dcb == has_g)
      r.fail("coupling", has_dcb ? "dcb_dx_af_um" : "g_khz_per_nm",
             "[coupling] needs exactly one of dcb_dx_af_um or g_khz_per_nm");
    const double dcd_dx = r.number_or("coupling", "dcd_dx_af_um", 0.0) * af_per_um_to_f_per_m;
    const CouplingModel coupling =
        has_dcb ? CouplingModel::from_geometry(
                      r.number("coupling", "dcb_dx_af_um") * af_per_um_to_f_per_m, dcd_dx, cavity)
                : CouplingModel(0.0, dcd_dx,
                                r.number("coupling", "g_khz_per_nm") * khz_per_nm_to_rad_s_per_m);

    const NoiseModel noise(r.number_or("noise", "t_n_k", 0.0),
                           r.number_or("noise", "a_tls_rad2_at_1hz", 0.0),
                           r.number_or("noise", "tls_exponent", 0.5),
                           r.number_or("noise", "gain_factor", 1.0));

    std::optional<DriveSpec> drive;
    if (r.has_section("drive"))
      drive.emplace(r.number("drive", "v_dc_v"), r.number("drive", "v_ac_mv") * 1e-3,
                    r.number("drive", "omega_drive_khz") * khz_to_rad_s);

    RunControls run;
    if (r.has("run", "seed")) run.seed = r.unsigned64("run", "seed");
    run.duration_s = r.maybe_number("run", "duration_s");
    if (r.has("run", "dt_ns")) run.dt_s = r.number("run", "dt_ns") * 1e-9;
    run.keep_every = static_cast<int>(r.has("run", "keep_every") ? r.integer("run", "keep_every") : 1);
    run.averages = static_cast<int>(r.has("run", "averages") ? r.integer("run", "averages") : 100);
    if (r.has("run", "statistical")) run.statistical = r.boolean("run", "statistical");
    if (r.has("run", "grid_min_khz")) run.grid_min_hz = r.number("run", "grid_min_khz") * 1e3;
    if (r.has("run", "grid_max_khz")) run.grid_max_hz = r.number("run", "grid_max_khz") * 1e3;
    run.grid_points =
        static_cast<int>(r.has("run", "grid_points") ? r.integer("run", "grid_points") : 2001);
    if (r.has("run", "welch_segment")) {
      const long seg = r.integer("run", "welch_segment");
      if (seg < 8) r.fail("run", "welch_segment", "welch_segment must be >= 8");
      run.welch_segment = static_cast<std::size_t>(seg);
    }
    run.welch_overlap = r.number_or("run", "welch_overlap", 0.5);
    if (r.has("run", "fit_window_min_khz"))
      run.fit_window_min_hz = r.number("run", "fit_window_min_khz") * 1e3;
    if (r.has("run", "fit_window_max_khz"))
      run.fit_window_max_hz = r.number("run", "fit_window_max_khz") * 1e3;
    if (r.has("run", "probe")) {
      const auto& e = r.entry("run", "probe");
      if (e.value == "resonant")
        run.probe_detuned = false;
      else if (e.value == "detuned_by_omega_m")
        run.probe_detuned = true;
      else
        throw ConfigError(source_name, e.line,
                          "probe must be 'resonant' or 'detuned_by_omega_m'");
    }
    if (run.keep_every < 1) r.fail("run", "keep_every", "keep_every must be >= 1");
    if (run.averages < 0) r.fail("run", "averages", "averages must be >= 0");
    if (!(run.welch_overlap >= 0.0 && run.welch_overlap < 1.0))
      r.fail("run", "welch_overlap", "welch_overlap must be in [0, 1)");

    SweepAxes sweep;
    if (r.has("sweep", "power_pw")) {
      sweep.powers_w = r.list("sweep", "power_pw");
      for (auto& p : sweep.powers_w) p *= 1e-12;
    }
    if (r.has("sweep", "temperature_mk")) {
      sweep.temperatures_k = r.list("sweep", "temperature_mk");
      for (auto& t : sweep.temperatures_k) t *= 1e-3;
    }
    sweep.min_fit_temp_k = r.number_or("sweep", "min_fit_temp_mk", 127.0) * 1e-3;
    if (r.has("sweep", "saturation_mk")) {
      sweep.saturation_k = r.list("sweep", "saturation_mk");
      for (auto& t : sweep.saturation_k) t *= 1e-3;
      if (sweep.saturation_k.size() > 1 && sweep.saturation_k.size() != sweep.powers_w.size())
        r.fail("sweep", "saturation_mk",
               "saturation_mk must be a single value or one value per power point");
    }
    if (r.has("sweep", "base_temperature_mk"))
      sweep.base_temperature_k = r.number("sweep", "base_temperature_mk") * 1e-3;

    Scenario scenario(cavity, v0, mode, coupling, noise, drive, run, sweep);
    for (const auto& [section, entries] : raw)
      for (const auto& [key, e] : entries) scenario.raw[section][key] = e.value;
    return scenario;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string serialize_scenario(const Scenario& scenario) {
  std::ostringstream out;
  bool first = true;
  for (const char* section : section_order) {
    const auto s = scenario.raw.find(section);
    if (s == scenario.raw.end() || s->second.empty()) continue;
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const std::string& key : known_keys.at(section)) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) out << key << " = " << k->second << "\n";
    }
  }
  return out.str();
}

}  // namespace cavilab
