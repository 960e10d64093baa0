#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lidarsurf/bayes.hpp"
#include "lidarsurf/graph.hpp"
#include "lidarsurf/metrics.hpp"
#include "lidarsurf/parallel.hpp"
#include "lidarsurf/saliency.hpp"
#include "lidarsurf/scene.hpp"
#include "lidarsurf/surfaces.hpp"
#include "lidarsurf/synthetic.hpp"
#include "oracles.hpp"

using namespace lidarsurf;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-12);
}

// Detection, surface extraction, CDA and metrics on a simulated layered scene.
struct SceneRun {
  double kept_fraction = 0.0;
  EvalReport report;
};

struct SceneSetup {
  CubeDims dims{64, 64, 1, 128};
  std::size_t layers = 2;
  std::size_t classes = 1;
  double irf_sigma = 0.6;
  double ppp = 16.0;
  double sbr = 1.0;
  double pfa = 1e-2;
  double tau = 1.0;
  std::uint64_t seed = 1;
};

SceneRun run_scene(const SceneSetup& s) {
  LayeredSceneOptions opt;
  opt.dims = s.dims;
  opt.layers = s.layers;
  opt.signatures = default_signatures(s.classes, s.dims.wavelengths);
  const GroundTruthScene scene = make_layered_scene(opt);
  const Irf irf = Irf::gaussian(s.dims.wavelengths, s.irf_sigma);
  const auto [calibrated, bg] = calibrate(scene, irf, BackgroundSpec::uniform(1.0), s.ppp, s.sbr);
  const HistogramCube cube = sample_poisson(expected_rates(calibrated, irf, bg), s.seed);

  const DetectionResult det = detect(cube, irf, KernelSet::simulation_default(), s.pfa);
  const SurfaceSet surfaces =
      select_scales(extract_surfaces(det.map, det.stack, irf, det.background, s.layers));
  const SpectralLibrary library = SpectralLibrary::from_signatures(opt.signatures);
  const CdaConfig cda;
  const CdaResult res = run_cda(surfaces, library, build_graph(surfaces, cda.rho), cda);
  SceneRun out;
  out.kept_fraction = det.map.kept_fraction();
  out.report = evaluate(estimate_cloud(surfaces, res.state), scene_cloud(calibrated), s.tau);
  return out;
}

// Random surfaces, hyperparameters and state, as in the unit tests.
struct Instance {
  SurfaceSet set;
  SpectralLibrary lib;
  SurfaceGraph graph;
  ModelState st;
  double rho = 1.0;
};

Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  fixture::RandomSurfaceOptions o;
  o.rows = 4;
  o.cols = 5;
  o.wavelengths = 2;
  o.bins = 48;
  o.photon_scale = 5.0 + 40.0 * unit(rng);
  Instance in;
  in.set = fixture::random_surfaces(seed, o);
  in.lib = SpectralLibrary::from_signatures(default_signatures(o.classes, o.wavelengths));
  for (std::size_t i = 0; i < in.lib.alpha.size(); ++i) {
    in.lib.alpha[i] = 1.5 + 60.0 * unit(rng);
    in.lib.nu[i] = 1.0 + 60.0 * unit(rng);
    in.lib.eps[i] = 0.05 + 3.0 * unit(rng);
  }
  in.rho = 0.5 + 2.0 * unit(rng);
  in.graph = build_graph(in.set, in.rho);
  in.st = init_state(in.set, in.lib, in.graph);
  for (auto& v : in.st.r) v = 0.1 + 30.0 * unit(rng);
  for (auto& v : in.st.beta) v = 0.01 + 2.0 * unit(rng);
  for (auto& v : in.st.h) v = 0.1 + 5.0 * unit(rng);
  for (auto& v : in.st.w) v = 0.1 + 5.0 * unit(rng);
  for (auto& v : in.st.label) v = std::min<std::size_t>(o.classes - 1, std::size_t(unit(rng) * double(o.classes)));
  return in;
}

Outcome criterion1() {
  const auto start = Clock::now();
  const std::size_t instances = 100;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  auto record = [&](double got, double want) {
    ++checked;
    const double err = std::abs(got - want) / std::max(std::abs(want), 1e-12);
    worst = std::max(worst, err);
    if (!close_rel(got, want, 1e-5)) ++failed;
  };

  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    const Instance in = random_instance(10000 + seed);
    const ModelState& st = in.st;
    const double L = double(st.wavelengths);

    ModelState r_next = st, b_next = st, h_next = st, w_next = st;
    update_reflectivity(r_next, in.lib);
    update_beta(b_next, in.lib);
    update_gain(h_next, in.graph);
    update_aux(w_next, in.graph);

    for (std::size_t s = 0; s < st.surfaces; ++s) {
      if (!st.present[s]) continue;
      const std::size_t k = st.label[s];
      for (std::size_t l = 0; l < st.wavelengths; ++l) {
        const double a = in.lib.alpha[in.lib.at(k, l)], b = st.beta[st.bi(s, k, l)];
        const double y = st.ybar[st.ri(s, l)], h = st.h[s];
        auto f = [&](double r) { return oracle::poisson_logpmf(y, h * r) + oracle::gamma_logpdf_stable(r, a, b); };
        record(r_next.r[st.ri(s, l)], oracle::golden_max(f, 1e-9, 10.0 * (y + a) * b + 10.0));
      }
      for (std::size_t c = 0; c < st.classes; ++c) {
        for (std::size_t l = 0; l < st.wavelengths; ++l) {
          const std::size_t i = in.lib.at(c, l);
          const double r = st.r[st.ri(s, l)];
          auto f = [&](double b) {
            return (c == k ? oracle::gamma_logpdf_stable(r, in.lib.alpha[i], b) : 0.0) +
                   oracle::inv_gamma_logpdf(b, in.lib.nu[i], in.lib.eps[i]);
          };
          record(b_next.beta[st.bi(s, c, l)], oracle::golden_max(f, 1e-9, 10.0 * (r + in.lib.eps[i]) + 10.0));
        }
      }
      double t1 = 0.0, t2 = 0.0;
      for (std::size_t j : in.graph.aux_of(s)) {
        t1 += in.rho;
        t2 += in.rho / st.w[j];
      }
      auto g = [&](double h) {
        double v = 0.0;
        for (std::size_t l = 0; l < st.wavelengths; ++l)
          v += oracle::poisson_logpmf(st.ybar[st.ri(s, l)], h * st.r[st.ri(s, l)]);
        if (t1 > 0.0) v += L * ((t1 - 1.0) * std::log(h) - t2 * h);
        return v;
      };
      record(h_next.h[s], oracle::golden_max(g, 1e-9, 10.0 * st.ybarbar[s] + 100.0));
    }
    for (std::size_t j = 0; j < in.graph.aux_count(); ++j) {
      if (!in.graph.aux_active(j)) continue;
      double t1 = 0.0, t2 = 0.0;
      for (std::size_t s : in.graph.members_of(j)) {
        if (!st.present[s]) continue;
        t1 += in.rho;
        t2 += in.rho * st.h[s];
      }
      auto f = [&](double w) { return L * (-(t1 + 1.0) * std::log(w) - t2 / w); };
      record(w_next.w[j], oracle::golden_max(f, 1e-9, 10.0 * t2 + 10.0));
    }
  }
  const double elapsed = seconds_since(start);
  return {failed == 0 && elapsed < 10.0,
          fmt("%zu instances x 4 modes, %zu coordinates, %zu outside 1e-5, worst rel err %.2e, %.2f s",
              instances, checked, failed, worst, elapsed)};
}

Outcome criterion2() {
  const auto start = Clock::now();
  int converged = 0, monotone = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t R = 16, C = 16, L = 3, KS = 2, T = 64, W = 11;
    const Irf irf = Irf::gaussian(L, 1.0);
    const auto sig = default_signatures(3, L);
    SurfaceSet set(R, C, L, T, KS, irf);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < KS; ++k) {
          Surface& s = set[set.index(r, c, k)];
          s.row = r;
          s.col = c;
          s.slot = k;
          if (unit(rng) < 0.2) continue;
          s.present = true;
          s.depth = long(10 + 30 * k) + long(unit(rng) * 10.0);
          s.window_start = std::size_t(s.depth) - W / 2;
          s.window_length = W;
          const std::size_t cls = std::min<std::size_t>(2, std::size_t(unit(rng) * 3.0));
          const double h = 20.0 * (0.5 + unit(rng));
          s.clean.resize(L * W);
          for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t i = 0; i < W; ++i) {
              const double rate = h * sig[cls][l] * irf.at(l, long(s.window_start + i) - s.depth);
              s.clean[l * W + i] = std::poisson_distribution<int>(rate > 0.0 ? rate : 1e-12)(rng);
            }
          }
        }
      }
    }
    const SpectralLibrary lib = SpectralLibrary::from_signatures(sig);
    CdaConfig cfg;
    cfg.xi = 1e-4;
    cfg.max_iterations = 100;
    const CdaResult res = run_cda(set, lib, build_graph(set, cfg.rho), cfg);
    bool mono = !res.trace.empty() && res.trace.front().log_posterior >= res.initial_log_posterior - 1e-9;
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      mono = mono && res.trace[i].log_posterior >= res.trace[i - 1].log_posterior - 1e-9;
    converged += res.converged;
    monotone += mono;
  }
  const double elapsed = seconds_since(start);
  return {monotone == 20 && converged >= 18 && elapsed < 60.0,
          fmt("monotone %d/20, converged %d/20 within 100 sweeps, %.2f s", monotone, converged, elapsed)};
}

Outcome criterion3() {
  const auto start = Clock::now();
  const CubeDims dims{64, 64, 1, 256};
  const double level = 0.05;
  const Irf irf = Irf::gaussian(1, 1.0);
  bool pass = true;
  std::string detail;
  for (int shape = 0; shape < 2; ++shape) {
    const BackgroundSpec bg = shape == 0 ? BackgroundSpec::uniform(level)
                                         : BackgroundSpec::exponential_decay(dims, level, 80.0);
    const RealCube rates = expected_rates(GroundTruthScene(dims, 1), irf, bg);
    for (double pfa : {1e-2, 1e-3}) {
      double total = 0.0;
      const int seeds = 2;
      for (int seed = 0; seed < seeds; ++seed)
        total += detect(sample_poisson(rates, 300 + seed), irf, KernelSet::simulation_default(), pfa)
                     .map.kept_fraction();
      const double ratio = total / seeds / pfa;
      pass = pass && ratio >= 1.0 / 3.0 && ratio <= 3.0;
      detail += fmt("%s pfa %.0e ratio %.2f; ", shape == 0 ? "uniform" : "non-uniform", pfa, ratio);
    }
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 30.0, detail + fmt("%.2f s", elapsed)};
}

SceneSetup noiseless_setup() {
  SceneSetup s;
  s.ppp = 1000.0;
  s.sbr = kInfiniteSbr;
  s.pfa = 0.1;
  s.tau = 1.0;
  s.seed = 7;
  return s;
}

Outcome criterion4(SceneRun& run) {
  run = run_scene(noiseless_setup());
  const EvalReport& r = run.report;
  const double false_share = double(r.f_false) / double(r.gt_count);
  return {r.f_true >= 0.99 && false_share <= 0.01 && r.dae <= 0.5,
          fmt("F_true %.4f, F_false %zu (%.3f%% of %zu), DAE %.3f bins", r.f_true, r.f_false,
              100.0 * false_share, r.gt_count, r.dae)};
}

struct Stat {
  double mean = 0.0;
  double var = 0.0;
};

Stat f_true_stat(double ppp, double sbr) {
  std::vector<double> f;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SceneSetup s;
    s.ppp = ppp;
    s.sbr = sbr;
    s.tau = 4.0;
    s.seed = 500 + seed;
    f.push_back(run_scene(s).report.f_true);
  }
  Stat st;
  for (double v : f) st.mean += v / double(f.size());
  for (double v : f) st.var += (v - st.mean) * (v - st.mean) / double(f.size() - 1);
  return st;
}

Outcome criterion5() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;
  auto series = [&](const char* name, const std::vector<std::pair<double, double>>& cells) {
    std::vector<Stat> stats;
    for (const auto& [ppp, sbr] : cells) stats.push_back(f_true_stat(ppp, sbr));
    detail += std::string(name) + " F_true";
    for (const auto& s : stats) detail += fmt(" %.4f", s.mean);
    for (std::size_t i = 1; i < stats.size(); ++i) {
      const double se = std::sqrt((stats[i].var + stats[i - 1].var) / 5.0);
      pass = pass && stats[i].mean >= stats[i - 1].mean - se;
    }
    detail += "; ";
  };
  series("PPP 4/16/64 at SBR 1:", {{4.0, 1.0}, {16.0, 1.0}, {64.0, 1.0}});
  series("SBR 0.25/1/4 at PPP 16:", {{16.0, 0.25}, {16.0, 1.0}, {16.0, 4.0}});
  return {pass, detail + fmt("%.1f s", seconds_since(start))};
}

Outcome criterion6() {
  SceneSetup s;
  s.dims.wavelengths = 4;
  s.classes = 3;
  s.ppp = 50.0;
  s.sbr = 1.3;
  s.tau = 4.0;
  s.seed = 7;
  const EvalReport r = run_scene(s).report;
  const double acc = r.accuracy.value_or(0.0);
  return {acc >= 0.95, fmt("accuracy %.4f over %zu matched points (F_true %.4f)", acc, r.matched, r.f_true)};
}

Outcome criterion7() {
  const CubeDims dims{64, 64, 1, 128};
  const double level = 50.0;
  RealCube field(dims);
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      for (std::size_t t = 0; t < dims.bins; ++t) {
        const double x = double(c) / double(dims.cols - 1), y = double(r) / double(dims.rows - 1);
        const double tt = double(t) / double(dims.bins - 1);
        field(dims.pixel(r, c), 0, t) = level * (0.6 + 0.3 * x + 0.2 * y * y + 0.5 * std::exp(-3.0 * tt));
      }
    }
  }
  const auto stack = build_multiscale(sample_poisson(field, 3), KernelSet::simulation_default());
  const RealCube est = estimate_background(stack).materialize();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < field.data().size(); ++i) {
    const double d = est.data()[i] - field.data()[i];
    num += d * d;
    den += field.data()[i] * field.data()[i];
  }
  const double rel = std::sqrt(num / den);
  return {rel <= 0.10, fmt("relative L2 error %.4f at mean level %.0f counts per voxel", rel, level)};
}

Outcome criterion8(const SceneRun& noiseless) {
  LayeredSceneOptions opt;
  opt.dims = {200, 200, 1, 300};
  opt.signatures = default_signatures(1, 1);
  const Irf irf = Irf::gaussian(1, 0.6);
  const HistogramCube cube =
      simulate(make_layered_scene(opt), irf, BackgroundSpec::uniform(1.0), 16.0, 1.0, 11);
  set_thread_count(1);
  const auto start = Clock::now();
  const DetectionResult det = detect(cube, irf, KernelSet::simulation_default(), 1e-2);
  const SurfaceSet surfaces =
      select_scales(extract_surfaces(det.map, det.stack, irf, det.background, 2));
  const double elapsed = seconds_since(start);
  set_thread_count(0);
  return {elapsed < 10.0 && noiseless.kept_fraction <= 0.05,
          fmt("200x200x1x300 detection %.2f s single-threaded (%zu surfaces); noiseless scene keeps %.2f%% of voxels",
              elapsed, surfaces.present_count(), 100.0 * noiseless.kept_fraction)};
}

}  // namespace

int main() {
  SceneRun noiseless;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, [&] { return criterion4(noiseless); }},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, [&] { return criterion8(noiseless); }},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
