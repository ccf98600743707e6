// cavilab command-line front end: scenario in, plot-ready CSVs + manifest out.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cavilab/errors.hpp"
#include "cavilab/runner.hpp"
#include "cavilab/scenario.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> averages;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config, "scenario config file");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--averages", args.averages, "override the config averages");
}

cavilab::Scenario load(const CommonArgs& args) {
  cavilab::Scenario scenario = cavilab::load_scenario(args.config);
  if (args.seed) {
    scenario.run.seed = *args.seed;
    scenario.raw["run"]["seed"] = std::to_string(*args.seed);
  }
  if (args.averages) {
    if (*args.averages < 0) throw cavilab::ConfigError("--averages must be >= 0");
    scenario.run.averages = *args.averages;
    scenario.raw["run"]["averages"] = std::to_string(*args.averages);
  }
  return scenario;
}

void print_outputs(const cavilab::RunOutputs& outputs) {
  for (const auto& f : outputs.files) std::cout << "wrote " << f.string() << "\n";
  std::cout << "wrote " << outputs.manifest.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavilab: nanomechanical displacement detection through a microwave cavity"};
  app.require_subcommand(1);

  CommonArgs sim_args, cal_args, bud_args, proj_args, fit_args, gain_args;
  std::string gain_high_config;
  std::string fit_input;
  bool fit_sqrt = false;

  auto* simulate = app.add_subcommand(
      "simulate", "Langevin trajectory, displacement PSD and detected spectrum");
  add_common(simulate, sim_args);

  auto* calibrate = app.add_subcommand(
      "calibrate", "temperature sweep: simulate, fit and extract the coupling");
  add_common(calibrate, cal_args);

  auto* budget = app.add_subcommand(
      "budget", "power sweep of imprecision/saturation temperatures and sensitivities");
  add_common(budget, bud_args);

  auto* project = app.add_subcommand(
      "project", "quantum-limit projection curves for an ideal single-port cavity");
  add_common(project, proj_args);

  auto* fit = app.add_subcommand("fit", "Lorentzian fit of a spectrum CSV (or synthetic)");
  add_common(fit, fit_args);
  fit->add_option("input", fit_input, "spectrum CSV; omitted = synthesize from config");
  fit->add_flag("--sqrt", fit_sqrt, "fit the square root of a Lorentzian (amplitude data)");

  auto* gaincal = app.add_subcommand(
      "gaincal", "drive-tone gain calibration between a trusted low-power scenario and a "
                 "high-power one");
  add_common(gaincal, gain_args);
  gaincal->add_option("--config-high", gain_high_config, "high-power scenario config")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad usage is a configuration error
  }

  try {
    if (simulate->parsed()) {
      print_outputs(cavilab::run_simulate(load(sim_args), fs::path(sim_args.out_dir)));
    } else if (calibrate->parsed()) {
      print_outputs(cavilab::run_calibrate(load(cal_args), fs::path(cal_args.out_dir)));
    } else if (budget->parsed()) {
      print_outputs(cavilab::run_budget(load(bud_args), fs::path(bud_args.out_dir)));
    } else if (project->parsed()) {
      print_outputs(cavilab::run_project(load(proj_args), fs::path(proj_args.out_dir)));
    } else if (fit->parsed()) {
      std::optional<fs::path> input;
      if (!fit_input.empty()) input = fs::path(fit_input);
      print_outputs(cavilab::run_fit(load(fit_args), input, fit_sqrt,
                                     fs::path(fit_args.out_dir)));
    } else if (gaincal->parsed()) {
      const auto low = load(gain_args);
      CommonArgs high_args = gain_args;
      high_args.config = gain_high_config;
      const auto high = load(high_args);
      print_outputs(cavilab::run_gaincal(low, high, fs::path(gain_args.out_dir)));
    }
  } catch (const cavilab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cavilab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
