#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lidarsurf/metrics.hpp"
#include "lidarsurf_cli/config.hpp"

namespace lidarsurf::cli {

namespace fs = std::filesystem;

struct SimulateOutputs {
  fs::path cube;          // cube.lshc
  fs::path ground_truth;  // ground_truth.csv
  fs::path manifest;      // run.json
};

struct DetectOutputs {
  fs::path map;       // detection.lsdm
  fs::path surfaces;  // surfaces.lssf
  fs::path summary;   // detect.json
  double kept_fraction = 0.0;
  double threshold = 0.0;
  std::size_t present = 0;
};

struct ReconstructOutputs {
  fs::path points_csv;  // points.csv
  fs::path points_ply;  // points.ply
  fs::path trace;       // trace.csv
  std::size_t sweeps = 0;
  bool converged = false;
};

struct EvaluateOutputs {
  fs::path report_csv;   // report.csv
  fs::path report_json;  // report.json
  std::vector<EvalReport> reports;
};

struct PipelineOutputs {
  SimulateOutputs simulate;
  DetectOutputs detect;
  ReconstructOutputs reconstruct;
  EvaluateOutputs evaluate;
};

// Every command validates the config before touching the file system.
SimulateOutputs cmd_simulate(const PipelineConfig& config, const fs::path& out_dir);
DetectOutputs cmd_detect(const PipelineConfig& config, const fs::path& cube, const fs::path& out_dir);
ReconstructOutputs cmd_reconstruct(const PipelineConfig& config, const fs::path& surfaces,
                                   const fs::path& out_dir);
EvaluateOutputs cmd_evaluate(const PipelineConfig& config, const fs::path& estimate,
                             const fs::path& ground_truth, const fs::path& out_dir);
PipelineOutputs cmd_pipeline(const PipelineConfig& config, const fs::path& out_dir);

// PPP x SBR grid: cell i uses seed + i and writes to out_dir/cell_<i>. Also
// writes out_dir/grid.csv with one row per cell and tau.
std::vector<PipelineOutputs> cmd_grid(const PipelineConfig& config, const fs::path& out_dir);

}  // namespace lidarsurf::cli
