#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nopo/critical.hpp"
#include "nopo/ensemble.hpp"
#include "nopo/errors.hpp"
#include "nopo/spectra.hpp"

namespace nopo {

// Invalid configuration; the message carries source, line and JSON pointer.
struct ConfigError : ParameterError {
  using ParameterError::ParameterError;
};

struct ScaledTriple {
  double g2 = 0.0;
  double gamma_r = 1.0;
  double mu = 0.0;
  double gamma = 1.0;  // only used to convert to physical units
};

enum class Output { Spectra, NlResidual, Moments, Triple, Epr, Critical, Sweep };

std::string to_string(Output o);
Output output_from_string(const std::string& s);

// Analytic curves over a mu grid, one block per gamma_r.
struct SweepSettings {
  std::string kind = "opt_squeeze";
  double mu_start = 0.0;
  double mu_stop = 0.99;
  std::size_t mu_points = 100;
  std::vector<double> gamma_r;  // empty: the configured gamma_r
  double omega = 0.0;
};

struct TripleSettings {
  int half = 4;
  double t_seg = 100.0;
};

struct CriticalSettings {
  std::vector<double> eta;
  CriticalConfig sim;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::string figure;
  Representation rep = Representation::PositiveP;
  std::optional<ScaledTriple> params;
  std::optional<PhysicalParams> physical;
  IntegratorConfig integrator;
  SpectralSettings spectral;
  std::vector<Output> outputs;
  bool analytic_only = false;
  bool physical_units = false;
  std::optional<SweepSettings> sweep;
  TripleSettings triple;
  CriticalSettings critical;
  std::string out_dir = "out";
};

const std::vector<std::string>& sweep_kinds();

void validate(const ExperimentConfig& cfg);

/**
 * Parses a JSON config (comments allowed). A run manifest is accepted too:
 * its "config" member is used. Throws ConfigError.
 */
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

PhysicalParams resolve_physical(const ExperimentConfig& cfg);

struct Preset {
  std::string name;
  std::string figure;  // "Fig. N", empty for internal presets
  std::string summary;
  ExperimentConfig config;
};

const std::vector<Preset>& preset_catalog();
const Preset& find_preset(const std::string& name);
std::string describe(const Preset& p);

struct RunSummary {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> files;
  std::size_t completed = 0;
  std::size_t faulted = 0;
};

/**
 * Writes one CSV per requested output plus manifest.json into cfg.out_dir.
 * FaultBudgetExceeded propagates after the manifest is written.
 */
RunSummary run_experiment(const ExperimentConfig& cfg);

// 0 ok, 2 configuration or domain error, 3 fault budget exceeded, 1 anything else.
int exit_code(const std::exception& e);

}  // namespace nopo
