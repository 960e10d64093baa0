#include "lidarsurf_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "lidarsurf/bayes_io.hpp"
#include "lidarsurf/cube_io.hpp"
#include "lidarsurf/detection_io.hpp"
#include "lidarsurf/error.hpp"
#include "lidarsurf/graph.hpp"
#include "lidarsurf/metrics_io.hpp"
#include "lidarsurf/saliency.hpp"
#include "lidarsurf/surfaces.hpp"
#include "lidarsurf/synthetic.hpp"

namespace lidarsurf::cli {

namespace {

using nlohmann::json;

// Rethrows with the stage name prepended, keeping the error category.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

void prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
}

BackgroundSpec background_for(const SimulationConfig& s, const CubeDims& dims) {
  if (s.background == "exponential") return BackgroundSpec::exponential_decay(dims, 1.0, s.decay_bins);
  return BackgroundSpec::uniform(1.0);
}

}  // namespace

SimulateOutputs cmd_simulate(const PipelineConfig& config, const fs::path& out_dir) {
  config.validate();
  const SimulationConfig& s = config.simulation;
  const std::uint64_t hash = config_hash(config);

  LayeredSceneOptions opt;
  opt.dims = {s.rows, s.cols, s.wavelengths, s.bins};
  opt.layers = s.layers;
  opt.signatures = default_signatures(s.classes, s.wavelengths);

  auto [cube, truth] = stage("simulate", [&] {
    const GroundTruthScene scene = make_layered_scene(opt);
    const Irf irf = make_irf(config, s.wavelengths);
    auto [calibrated, bg] = calibrate(scene, irf, background_for(s, opt.dims), s.ppp, s.sbr);
    HistogramCube c = sample_poisson(expected_rates(calibrated, irf, bg), s.seed, s.bin_width);
    return std::pair{std::move(c), scene_cloud(calibrated, s.bin_width)};
  });

  prepare(out_dir);
  SimulateOutputs out{out_dir / "cube.lshc", out_dir / "ground_truth.csv", out_dir / "run.json"};
  store_cube(cube, out.cube);
  store_points_csv(truth, out.ground_truth, hash);
  write_json(out.manifest, {{"command", "simulate"},
                            {"config_hash", format_hash(hash)},
                            {"seed", s.seed},
                            {"config", to_json(config)},
                            {"artifacts", {out.cube.filename().string(), out.ground_truth.filename().string()}}});
  return out;
}

DetectOutputs cmd_detect(const PipelineConfig& config, const fs::path& cube_path,
                         const fs::path& out_dir) {
  config.validate();
  const std::uint64_t hash = config_hash(config);
  const HistogramCube cube = stage("load cube", [&] { return load_cube(cube_path); });

  const Irf irf = make_irf(config, cube.dims().wavelengths);
  DetectionResult det = stage("detect", [&] { return detect(cube, irf, config.kernels, config.pfa); });
  SurfaceSet surfaces = stage("surfaces", [&] {
    return select_scales(
        extract_surfaces(det.map, det.stack, irf, det.background, config.max_surfaces));
  });

  prepare(out_dir);
  DetectOutputs out;
  out.map = out_dir / "detection.lsdm";
  out.surfaces = out_dir / "surfaces.lssf";
  out.summary = out_dir / "detect.json";
  out.kept_fraction = det.map.kept_fraction();
  out.threshold = det.threshold;
  out.present = surfaces.present_count();
  store_detection_map(det.map, out.map, hash);
  store_surfaces(surfaces, out.surfaces, hash);
  json summary = {{"command", "detect"},
                  {"config_hash", format_hash(hash)},
                  {"input", cube_path.string()},
                  {"kept_voxels", det.map.kept()},
                  {"total_voxels", det.map.rows * det.map.cols * det.map.bins},
                  {"kept_fraction", out.kept_fraction},
                  {"threshold", std::isfinite(det.threshold) ? json(det.threshold) : json("inf")},
                  {"present_surfaces", out.present},
                  {"bin_width", cube.bin_width()}};
  if (det.fit) summary["gamma_fit"] = {{"shape", det.fit->shape}, {"scale", det.fit->scale}};
  write_json(out.summary, summary);
  return out;
}

ReconstructOutputs cmd_reconstruct(const PipelineConfig& config, const fs::path& surfaces_path,
                                   const fs::path& out_dir) {
  config.validate();
  const std::uint64_t hash = config_hash(config);
  const SurfaceSet surfaces = stage("load surfaces", [&] { return load_surfaces(surfaces_path); });
  const SpectralLibrary library =
      stage("library", [&] { return make_library(config, surfaces.wavelengths()); });

  const CdaResult res = stage("reconstruct", [&] {
    const SurfaceGraph graph = build_graph(surfaces, config.cda.rho);
    return run_cda(surfaces, library, graph, config.cda);
  });
  const PointCloud cloud = estimate_cloud(surfaces, res.state, config.simulation.bin_width);

  prepare(out_dir);
  ReconstructOutputs out{out_dir / "points.csv", out_dir / "points.ply", out_dir / "trace.csv",
                         res.trace.size(), res.converged};
  store_points_csv(cloud, out.points_csv, hash);
  store_points_ply(cloud, out.points_ply, hash);
  store_trace(res, out.trace, hash);
  return out;
}

EvaluateOutputs cmd_evaluate(const PipelineConfig& config, const fs::path& estimate,
                             const fs::path& ground_truth, const fs::path& out_dir) {
  config.validate();
  const std::uint64_t hash = config_hash(config);
  const PointCloud est = stage("load estimate", [&] { return load_points_csv(estimate); });
  const PointCloud gt = stage("load ground truth", [&] { return load_points_csv(ground_truth); });

  EvaluateOutputs out;
  out.reports = stage("evaluate", [&] { return sweep(est, gt, config.taus); });
  const double bin_width = gt.bin_width > 0.0 ? gt.bin_width : est.bin_width;

  prepare(out_dir);
  out.report_csv = out_dir / "report.csv";
  out.report_json = out_dir / "report.json";
  {
    std::ofstream f(out.report_csv);
    if (!f) throw FormatError("cannot open " + out.report_csv.string() + " for writing");
    write_reports_csv(out.reports, bin_width, f, hash);
  }
  {
    std::ofstream f(out.report_json);
    if (!f) throw FormatError("cannot open " + out.report_json.string() + " for writing");
    f << format_reports_json(out.reports, bin_width, hash);
  }
  return out;
}

PipelineOutputs cmd_pipeline(const PipelineConfig& config, const fs::path& out_dir) {
  config.validate();
  PipelineOutputs out;
  out.simulate = cmd_simulate(config, out_dir);
  out.detect = cmd_detect(config, out.simulate.cube, out_dir);
  out.reconstruct = cmd_reconstruct(config, out.detect.surfaces, out_dir);
  out.evaluate = cmd_evaluate(config, out.reconstruct.points_csv, out.simulate.ground_truth, out_dir);
  return out;
}

std::vector<PipelineOutputs> cmd_grid(const PipelineConfig& config, const fs::path& out_dir) {
  config.validate();
  require(!config.grid_ppp.empty(), "grid mode needs grid.ppp and grid.sbr");
  std::vector<PipelineOutputs> cells;
  std::vector<PipelineConfig> cell_configs;
  std::size_t index = 0;
  for (double ppp : config.grid_ppp) {
    for (double sbr : config.grid_sbr) {
      PipelineConfig cell = config;
      cell.grid_ppp.clear();
      cell.grid_sbr.clear();
      cell.simulation.ppp = ppp;
      cell.simulation.sbr = sbr;
      cell.simulation.seed = config.simulation.seed + index;
      cell.validate();
      cell_configs.push_back(std::move(cell));
      ++index;
    }
  }

  prepare(out_dir);
  std::ofstream summary(out_dir / "grid.csv");
  if (!summary) throw FormatError("cannot open grid.csv for writing");
  summary << "# config_hash " << format_hash(config_hash(config)) << "\n";
  summary << "cell,ppp,sbr,seed,tau_bins,f_true,f_false,iae,dae_bins,accuracy\n";
  summary << std::setprecision(17);
  for (std::size_t i = 0; i < cell_configs.size(); ++i) {
    const PipelineConfig& cell = cell_configs[i];
    cells.push_back(cmd_pipeline(cell, out_dir / ("cell_" + std::to_string(i))));
    for (const EvalReport& r : cells.back().evaluate.reports) {
      summary << i << ',' << cell.simulation.ppp << ',' << cell.simulation.sbr << ','
              << cell.simulation.seed << ',' << r.tau << ',' << r.f_true << ',' << r.f_false << ','
              << r.iae << ',' << r.dae << ',';
      if (r.accuracy) summary << *r.accuracy;
      summary << "\n";
    }
  }
  return cells;
}

}  // namespace lidarsurf::cli
