#include <benchmark/benchmark.h>

#include "lidarsurf/bayes.hpp"
#include "lidarsurf/graph.hpp"
#include "lidarsurf/multiscale.hpp"
#include "lidarsurf/parallel.hpp"
#include "lidarsurf/saliency.hpp"
#include "lidarsurf/scene.hpp"
#include "lidarsurf/surfaces.hpp"
#include "lidarsurf/synthetic.hpp"

using namespace lidarsurf;

namespace {

HistogramCube scene_cube(std::size_t side, std::size_t bins, std::size_t wavelengths = 1) {
  LayeredSceneOptions opt;
  opt.dims = {side, side, wavelengths, bins};
  opt.signatures = default_signatures(wavelengths > 1 ? 3 : 1, wavelengths);
  const Irf irf = Irf::gaussian(wavelengths, 0.6);
  return simulate(make_layered_scene(opt), irf, BackgroundSpec::uniform(1.0), 16.0, 1.0, 1);
}

void BM_Multiscale(benchmark::State& state) {
  const auto cube = scene_cube(std::size_t(state.range(0)), 128);
  set_thread_count(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_multiscale(cube, KernelSet::simulation_default()));
  set_thread_count(0);
  state.SetItemsProcessed(state.iterations() * std::int64_t(cube.data().size()));
}
BENCHMARK(BM_Multiscale)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Detection(benchmark::State& state) {
  const std::size_t side = std::size_t(state.range(0));
  const auto cube = scene_cube(side, 300);
  const Irf irf = Irf::gaussian(1, 0.6);
  set_thread_count(std::size_t(state.range(1)));
  for (auto _ : state) {
    const auto det = detect(cube, irf, KernelSet::simulation_default(), 1e-2);
    benchmark::DoNotOptimize(select_scales(extract_surfaces(det.map, det.stack, irf, det.background, 2)));
  }
  set_thread_count(0);
  state.SetItemsProcessed(state.iterations() * std::int64_t(cube.data().size()));
}
BENCHMARK(BM_Detection)->Args({64, 1})->Args({200, 1})->Args({200, 0})->Unit(benchmark::kMillisecond);

void BM_CdaSweep(benchmark::State& state) {
  const std::size_t L = 4;
  const auto cube = scene_cube(std::size_t(state.range(0)), 128, L);
  const Irf irf = Irf::gaussian(L, 0.6);
  const auto det = detect(cube, irf, KernelSet::simulation_default(), 1e-2);
  const auto surfaces = select_scales(extract_surfaces(det.map, det.stack, irf, det.background, 2));
  const auto library = SpectralLibrary::from_signatures(default_signatures(3, L));
  const CdaConfig config;
  const auto graph = build_graph(surfaces, config.rho);
  const ModelState initial = init_state(surfaces, library, graph);
  for (auto _ : state) {
    state.PauseTiming();
    ModelState st = initial;
    state.ResumeTiming();
    benchmark::DoNotOptimize(cda_sweep(st, surfaces, library, graph, config));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(surfaces.present_count()));
}
BENCHMARK(BM_CdaSweep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
