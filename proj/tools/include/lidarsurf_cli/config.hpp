#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lidarsurf/bayes.hpp"
#include "lidarsurf/irf.hpp"
#include "lidarsurf/multiscale.hpp"
#include "lidarsurf/scene.hpp"

namespace lidarsurf::cli {

struct SimulationConfig {
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t wavelengths = 1;
  std::size_t bins = 128;
  std::size_t layers = 2;
  std::size_t classes = 1;
  double ppp = 16.0;
  double sbr = 1.0;  // +inf (JSON string "inf") removes the background
  std::string background = "uniform";  // uniform | exponential
  double decay_bins = 40.0;
  std::uint64_t seed = 1;
  double bin_width = 16e-12;  // seconds
};

struct PipelineConfig {
  KernelSet kernels = KernelSet::simulation_default();
  double pfa = 1e-2;
  std::size_t max_surfaces = 2;
  double irf_sigma = 0.6;  // bins
  CdaConfig cda;
  double alpha = SpectralLibrary::kDefaultAlpha;
  double nu = SpectralLibrary::kDefaultNu;
  // Path to a library JSON file or an inline library object; null uses the
  // synthetic signatures of simulation.classes.
  nlohmann::json library;
  SimulationConfig simulation;
  std::vector<double> taus{0.0, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> grid_ppp;
  std::vector<double> grid_sbr;
  std::string output = "out";

  // Throws ValidationError on any violated precondition.
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Unknown keys are rejected. Missing keys keep their defaults.
PipelineConfig from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

// Applies "dotted.key=value"; the value is parsed as JSON, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// FNV-1a 64 over the canonical dump of to_json(config).
std::uint64_t config_hash(const PipelineConfig& config);

Irf make_irf(const PipelineConfig& config, std::size_t wavelengths);
SpectralLibrary make_library(const PipelineConfig& config, std::size_t wavelengths);

}  // namespace lidarsurf::cli
