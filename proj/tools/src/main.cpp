#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidarsurf/error.hpp"
#include "lidarsurf/metrics_io.hpp"
#include "lidarsurf/parallel.hpp"
#include "lidarsurf_cli/commands.hpp"

namespace {

using namespace lidarsurf;
using namespace lidarsurf::cli;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config_path, "JSON config file");
  cmd->add_option("-s,--set", common.overrides, "Override a config key: dotted.key=value");
  cmd->add_option("-o,--out", common.out, "Output directory (default: config output)");
  cmd->add_option("-j,--threads", common.threads,
                  "Worker threads (default: LIDARSURF_THREADS or hardware)");
}

PipelineConfig resolve(const Common& common) {
  nlohmann::json doc = nlohmann::json::object();
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw ValidationError("cannot open config " + common.config_path);
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  for (const auto& o : common.overrides) apply_override(doc, o);
  PipelineConfig config = from_json(doc);
  if (!common.out.empty()) config.output = common.out;
  if (common.threads > 0) set_thread_count(common.threads);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface detection, reconstruction and classification for multispectral "
               "single-photon LiDAR histogram cubes"};
  app.require_subcommand(1);

  Common common;
  std::string cube, surfaces, estimate, truth;
  std::vector<double> taus;

  auto* sim = app.add_subcommand("simulate", "Simulate a layered scene: cube.lshc, ground_truth.csv");
  add_common(sim, common);

  auto* det = app.add_subcommand("detect", "Detect surfaces: detection.lsdm, surfaces.lssf, detect.json");
  add_common(det, common);
  det->add_option("cube", cube, "Histogram cube (binary or sparse text)")->required();

  auto* rec = app.add_subcommand("reconstruct", "Bayesian reconstruction: points.csv, points.ply, trace.csv");
  add_common(rec, common);
  rec->add_option("surfaces", surfaces, "Surface set from detect")->required();

  auto* eva = app.add_subcommand("evaluate", "Point-cloud metrics: report.csv, report.json");
  add_common(eva, common);
  eva->add_option("estimate", estimate, "Estimated point table")->required();
  eva->add_option("truth", truth, "Ground-truth point table")->required();
  eva->add_option("-t,--tau", taus, "Distance tolerances in bins (overrides config taus)");

  auto* pipe = app.add_subcommand("pipeline", "simulate, detect, reconstruct, evaluate; grid mode when grid.ppp/sbr are set");
  add_common(pipe, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    PipelineConfig config = resolve(common);
    if (!taus.empty()) {
      config.taus = taus;
      config.validate();
    }
    const std::filesystem::path out = config.output;
    const std::string hash = format_hash(config_hash(config));

    if (*sim) {
      const auto r = cmd_simulate(config, out);
      std::cout << "cube " << r.cube.string() << "\nground truth " << r.ground_truth.string()
                << "\nconfig_hash " << hash << "\n";
    } else if (*det) {
      const auto r = cmd_detect(config, cube, out);
      std::cout << "kept fraction " << r.kept_fraction << "\npresent surfaces " << r.present
                << "\nconfig_hash " << hash << "\n";
    } else if (*rec) {
      const auto r = cmd_reconstruct(config, surfaces, out);
      std::cout << "sweeps " << r.sweeps << (r.converged ? " (converged)" : " (not converged)")
                << "\npoints " << r.points_csv.string() << "\nconfig_hash " << hash << "\n";
    } else if (*eva) {
      const auto r = cmd_evaluate(config, estimate, truth, out);
      for (const auto& rep : r.reports)
        std::cout << "tau " << rep.tau << " f_true " << rep.f_true << " f_false " << rep.f_false
                  << " iae " << rep.iae << " dae " << rep.dae << "\n";
      std::cout << "config_hash " << hash << "\n";
    } else if (*pipe) {
      if (!config.grid_ppp.empty()) {
        const auto cells = cmd_grid(config, out);
        std::cout << "cells " << cells.size() << "\ngrid " << (out / "grid.csv").string() << "\n";
      } else {
        const auto r = cmd_pipeline(config, out);
        for (const auto& rep : r.evaluate.reports)
          std::cout << "tau " << rep.tau << " f_true " << rep.f_true << " f_false " << rep.f_false
                    << " iae " << rep.iae << " dae " << rep.dae << "\n";
      }
      std::cout << "config_hash " << hash << "\n";
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
