#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "nopo/harness.hpp"

using namespace nopo;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool physical_units = false;
};

void add_overrides(CLI::App* c, Overrides& o) {
  c->add_option("--seed", o.seed, "Base RNG seed");
  c->add_option("--out", o.out, "Output directory");
  c->add_flag("--physical-units", o.physical_units, "Frequency columns in physical units (omega * gamma)");
}

int execute(ExperimentConfig cfg, const Overrides& o) {
  if (o.seed) cfg.integrator.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.physical_units) cfg.physical_units = true;
  RunSummary s = run_experiment(cfg);
  for (const auto& f : s.files) std::cout << f.string() << "\n";
  std::cout << s.manifest.string() << "\n";
  if (s.faulted) std::cerr << "warning: " << s.faulted << " trajectories faulted\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nondegenerate parametric oscillator: simulations and closed-form spectra"};
  app.require_subcommand(1);

  std::string config_file, preset_name, analytic_name;
  Overrides run_o, preset_o, analytic_o;

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config or manifest");
  run->add_option("config", config_file, "Config file")->required();
  add_overrides(run, run_o);

  auto* preset = app.add_subcommand("preset", "Run a catalogued preset");
  preset->add_option("name", preset_name, "Preset name")->required();
  add_overrides(preset, preset_o);

  auto* analytic = app.add_subcommand("analytic", "Closed-form outputs of a preset, no simulation");
  analytic->add_option("name", analytic_name, "Preset name")->required();
  add_overrides(analytic, analytic_o);

  auto* list = app.add_subcommand("list-presets", "Print the preset catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      for (const auto& p : preset_catalog()) std::cout << describe(p) << "\n";
      return 0;
    }
    if (*run) return execute(load_config(config_file), run_o);
    if (*preset) return execute(find_preset(preset_name).config, preset_o);
    if (*analytic) {
      ExperimentConfig c = find_preset(analytic_name).config;
      c.analytic_only = true;
      return execute(c, analytic_o);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
