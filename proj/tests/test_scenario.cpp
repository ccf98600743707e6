#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "cavilab/constants.hpp"
#include "cavilab/errors.hpp"
#include "cavilab/scenario.hpp"
#include "helpers.hpp"

using namespace cavilab;
using doctest::Approx;
using testutil::two_pi;

namespace {

const std::string base_config = R"(# workhorse beam scenario
[cavity]
omega_c_ghz = 5.0
q_int = 38000
q_ext = 14000
z_line_ohm = 70
power_pw = 68
v0_v = 1.0

[mechanics]
omega_m_khz = 240
mass_pg = 2
q_m = 2300
temperature_mk = 100

[coupling]
dcb_dx_af_um = 170
dcd_dx_af_um = 0.2

[noise]
t_n_k = 7.5
a_tls_rad2_at_1hz = 0
tls_exponent = 0.5
gain_factor = 1

[drive]
v_dc_v = 1
v_ac_mv = 10
omega_drive_khz = 240

[run]
seed = 42
duration_s = 0.05
averages = 100
statistical = true
grid_points = 801

[sweep]
power_pw = 4, 27, 68
temperature_mk = 130, 164, 198, 232, 266, 300
min_fit_temp_mk = 127
)";

}  // namespace

TEST_CASE("parse converts units into strict SI") {
  const auto s = parse_scenario(base_config, "test.cfg");
  CHECK(s.cavity.omega_c == Approx(two_pi * 5e9).epsilon(1e-14));
  CHECK(s.cavity.q_int == Approx(38000.0));
  CHECK(s.cavity.power_incident == Approx(68e-12).epsilon(1e-14));
  CHECK(s.cavity.z_line == Approx(70.0));
  CHECK(s.v0 == Approx(1.0));
  CHECK(s.mode.omega_m == Approx(two_pi * 240e3).epsilon(1e-14));
  CHECK(s.mode.mass == Approx(2e-15).epsilon(1e-14));
  CHECK(s.mode.temperature_bath == Approx(0.1).epsilon(1e-14));
  CHECK(s.coupling.dcb_dx == Approx(1.7e-10).epsilon(1e-14));
  CHECK(s.coupling.dcd_dx == Approx(2e-13).epsilon(1e-14));
  CHECK(s.coupling.g == Approx(coupling_from_geometry(1.7e-10, s.cavity)).epsilon(1e-14));
  CHECK(s.noise.t_n == Approx(7.5));
  REQUIRE(s.drive.has_value());
  CHECK(s.drive->v_ac == Approx(10e-3).epsilon(1e-14));
  CHECK(s.drive->omega_drive == Approx(two_pi * 240e3).epsilon(1e-14));
  REQUIRE(s.run.seed.has_value());
  CHECK(*s.run.seed == 42);
  CHECK(s.run.averages == 100);
  CHECK(s.sweep.powers_w.size() == 3);
  CHECK(s.sweep.powers_w[1] == Approx(27e-12).epsilon(1e-14));
  CHECK(s.sweep.temperatures_k.size() == 6);
  CHECK(s.sweep.min_fit_temp_k == Approx(0.127).epsilon(1e-14));
  // interface Hz values are the rad/s values divided by 2 pi exactly
  CHECK(s.mode.omega_m / two_pi == Approx(240e3).epsilon(1e-15));
}

TEST_CASE("parse -> serialize -> parse is the identity") {
  const auto first = parse_scenario(base_config, "test.cfg");
  const std::string canonical = serialize_scenario(first);
  const auto second = parse_scenario(canonical, "round.cfg");
  CHECK(serialize_scenario(second) == canonical);
  CHECK(second.cavity.omega_c == first.cavity.omega_c);
  CHECK(second.mode.mass == first.mode.mass);
  CHECK(second.coupling.g == first.coupling.g);
  CHECK(second.sweep.powers_w == first.sweep.powers_w);
}

TEST_CASE("unknown keys and sections are hard errors with locations") {
  const std::string bad_key = "[cavity]\nomega_c_ghz = 5\nq_imt = 38000\n";
  try {
    parse_scenario(bad_key, "typo.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("typo.cfg:3") != std::string::npos);
    CHECK(msg.find("q_imt") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("[resonator]\nq = 1\n", "x.cfg"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("omega_c_ghz = 5\n", "x.cfg"), ConfigError);  // no section
}

TEST_CASE("malformed values are rejected with line numbers") {
  const std::string bad_number =
      "[cavity]\nomega_c_ghz = 5GHz\nq_int = 1\nq_ext = 1\nz_line_ohm = 1\npower_pw = 0\n"
      "v0_v = 1\n[mechanics]\nomega_m_khz = 240\nmass_pg = 2\nq_m = 10\ntemperature_mk = 1\n"
      "[coupling]\ng_khz_per_nm = 1\n";
  try {
    parse_scenario(bad_number, "num.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("num.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("[cavity]\nq_int = 1\nq_int = 2\n", "dup.cfg"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[cavity]\nq_int =\n", "empty.cfg"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[cavity]\nq_int\n", "noeq.cfg"), ConfigError);
}

TEST_CASE("missing required sections and keys") {
  CHECK_THROWS_AS(parse_scenario("[cavity]\nomega_c_ghz = 5\n", "m.cfg"), ConfigError);
  const std::string no_coupling =
      "[cavity]\nomega_c_ghz = 5\nq_int = 1000\nq_ext = 1000\nz_line_ohm = 70\npower_pw = 1\n"
      "v0_v = 1\n[mechanics]\nomega_m_khz = 240\nmass_pg = 2\nq_m = 10\ntemperature_mk = 1\n";
  CHECK_THROWS_AS(parse_scenario(no_coupling, "m.cfg"), ConfigError);
}

TEST_CASE("coupling requires exactly one construction route") {
  auto with_coupling = [](const std::string& coupling_lines) {
    return "[cavity]\nomega_c_ghz = 5\nq_int = 38000\nq_ext = 14000\nz_line_ohm = 70\n"
           "power_pw = 68\nv0_v = 1\n[mechanics]\nomega_m_khz = 240\nmass_pg = 2\n"
           "q_m = 2300\ntemperature_mk = 100\n[coupling]\n" +
           coupling_lines;
  };
  CHECK_THROWS_AS(
      parse_scenario(with_coupling("dcb_dx_af_um = 170\ng_khz_per_nm = 1.16\n"), "c.cfg"),
      ConfigError);
  CHECK_THROWS_AS(parse_scenario(with_coupling("dcd_dx_af_um = 0.2\n"), "c.cfg"), ConfigError);

  const auto direct = parse_scenario(with_coupling("g_khz_per_nm = 1.16\n"), "c.cfg");
  CHECK(direct.coupling.g == Approx(two_pi * 1.16e12).epsilon(1e-12));
  CHECK(direct.coupling.dcb_dx == 0.0);
}

TEST_CASE("inline comments after values are stripped") {
  std::string cfg = base_config;
  cfg.replace(cfg.find("q_ext = 14000"), 13, "q_ext = 14000   # overcoupled");
  const auto s = parse_scenario(cfg, "inline.cfg");
  CHECK(s.cavity.q_ext == Approx(14000.0));
  CHECK(serialize_scenario(s).find("overcoupled") == std::string::npos);
}

TEST_CASE("lossless sentinel parses") {
  const std::string lossless_cfg =
      "[cavity]\nomega_c_ghz = 12\nq_int = lossless\nq_ext = 3000\nz_line_ohm = 70\n"
      "power_pw = 1\nv0_v = 1\n[mechanics]\nomega_m_khz = 2000\nmass_pg = 2\nq_m = 100000\n"
      "temperature_mk = 50\n[coupling]\ng_khz_per_nm = 20\n";
  const auto s = parse_scenario(lossless_cfg, "l.cfg");
  CHECK(std::isinf(s.cavity.q_int));
  CHECK(total_quality_factor(s.cavity.q_int, s.cavity.q_ext) == Approx(3000.0));
}

TEST_CASE("derived run helpers") {
  const auto s = parse_scenario(base_config, "test.cfg");
  CHECK(s.dt() == Approx(two_pi / (300.0 * s.mode.omega_m)).epsilon(1e-14));
  const auto grid = s.grid_hz();
  CHECK(grid.size() == 801);
  const double fwhm_hz = s.mode.gamma_m() / two_pi;
  CHECK(grid.front() == Approx(240e3 - 10.0 * fwhm_hz).epsilon(1e-12));
  CHECK(grid.back() == Approx(240e3 + 10.0 * fwhm_hz).epsilon(1e-12));
  const auto [lo, hi] = s.fit_window_hz();
  CHECK(lo == Approx(240e3 - 8.0 * fwhm_hz).epsilon(1e-12));
  CHECK(hi == Approx(240e3 + 8.0 * fwhm_hz).epsilon(1e-12));
  const auto geometry = s.geometry();
  CHECK(geometry.s_min == Approx(0.2692307692307693).epsilon(1e-12));
  CHECK(geometry.detuning == 0.0);
}

TEST_CASE("probe detuning flag is recorded in the geometry") {
  std::string cfg = base_config;
  cfg += "\n[run]\n";  // appending a duplicate section is fine, keys merge
  CHECK_THROWS_AS(parse_scenario(cfg + "seed = 42\n", "dup.cfg"), ConfigError);

  std::string detuned = base_config;
  const auto pos = detuned.find("grid_points = 801");
  detuned.insert(pos, "probe = detuned_by_omega_m\n");
  const auto s = parse_scenario(detuned, "det.cfg");
  CHECK(s.run.probe_detuned);
  CHECK(s.geometry().detuning == Approx(s.mode.omega_m));
}
