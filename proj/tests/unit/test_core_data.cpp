#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "fixtures.hpp"
#include "lidarsurf/cube_io.hpp"
#include "lidarsurf/scene.hpp"
#include "lidarsurf/synthetic.hpp"

using namespace lidarsurf;

namespace {

GroundTruthScene single_surface(CubeDims dims, long depth, double r) {
  GroundTruthScene scene(dims, 1);
  for (std::size_t n = 0; n < dims.pixels(); ++n)
    scene.pixel(n).push_back({depth, std::vector<double>(dims.wavelengths, r), 0});
  return scene;
}

HistogramCube random_cube(CubeDims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> dist(0, 1000);
  HistogramCube cube(dims, 2.5e-11);
  for (auto& v : cube.data()) v = dist(rng);
  return cube;
}

}  // namespace

TEST_SUITE("core_data") {

TEST_CASE("irf validation and constructors") {
  CHECK_THROWS_AS(Irf({{0.5, 0.4}}, 0), ValidationError);
  CHECK_THROWS_AS(Irf({{1.5, -0.5}}, 0), ValidationError);
  CHECK_THROWS_AS(Irf({{0.5, 0.5}}, 2), ValidationError);
  const Irf g = Irf::gaussian(3, 1.2);
  CHECK(g.wavelengths() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    double sum = 0.0;
    for (double v : g.response(l)) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(g.at(0, 0) > g.at(0, 1));
  CHECK(g.at(0, 1000) == 0.0);
  // FWHM of a sampled Gaussian approaches 2 sqrt(2 ln 2) sigma.
  CHECK(Irf::gaussian(1, 4.0).fwhm() == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 4.0).epsilon(0.02));
  const Irf d = Irf::delta(2);
  CHECK(d.length() == 1);
  CHECK(d.at(1, 0) == 1.0);
  const Irf n = Irf::normalized({{1.0, 3.0}}, 1);
  CHECK(n.at(0, -1) == doctest::Approx(0.25));
}

TEST_CASE("zero reflectivity and zero background give an all-zero cube") {
  const CubeDims dims{4, 5, 2, 16};
  const auto scene = single_surface(dims, 6, 0.0);
  const auto cube = simulate(scene, Irf::gaussian(2, 1.0), BackgroundSpec::uniform(0.0), 10.0,
                             kInfiniteSbr, 3);
  CHECK(cube.dims() == dims);
  CHECK(cube.total() == 0);
}

TEST_CASE("art-protocol dimensions are accepted") {
  const CubeDims dims{185, 232, 1, 164};
  LayeredSceneOptions opt;
  opt.dims = dims;
  const auto scene = make_layered_scene(opt);
  const auto cube = simulate(scene, Irf::gaussian(1, 1.0), BackgroundSpec::uniform(1.0), 4.0, 1.0, 11);
  CHECK(cube.dims() == dims);
  CHECK(cube.data().size() == 185u * 232u * 164u);
}

TEST_CASE("monte-carlo mean of a single delta return") {
  const CubeDims dims{1, 1, 1, 16};
  const auto scene = single_surface(dims, 10, 1.0);
  const Irf irf = Irf::delta(1);
  const int seeds = 10000;
  std::vector<double> mean(dims.bins, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const auto cube = simulate(scene, irf, BackgroundSpec::uniform(0.0), 5.0, kInfiniteSbr, 1000 + s);
    for (std::size_t t = 0; t < dims.bins; ++t) mean[t] += cube(0, 0, t);
  }
  for (double& m : mean) m /= seeds;
  const double sigma = std::sqrt(5.0 / seeds);
  CHECK(std::abs(mean[10] - 5.0) <= 3.0 * sigma);
  for (std::size_t t = 0; t < dims.bins; ++t)
    if (t != 10) CHECK(mean[t] == 0.0);
}

TEST_CASE("per-voxel means pass a chi-square test against the analytic rate") {
  const CubeDims dims{1, 1, 1, 12};
  const long depth = 5;
  const Irf irf = Irf::gaussian(1, 1.0);
  const double ppp = 6.0, sbr = 2.0;
  const auto scene = single_surface(dims, depth, 1.0);
  // Hand calibration: all signal mass falls inside the histogram.
  std::vector<double> rate(dims.bins);
  for (std::size_t t = 0; t < dims.bins; ++t)
    rate[t] = ppp * sbr / (1.0 + sbr) * irf.at(0, long(t) - depth) + ppp / (1.0 + sbr) / double(dims.bins);

  const int reps = 4000;
  std::vector<double> sums(dims.bins, 0.0);
  for (int i = 0; i < reps; ++i) {
    const auto cube = simulate(scene, irf, BackgroundSpec::uniform(1.0), ppp, sbr, 50000 + i);
    for (std::size_t t = 0; t < dims.bins; ++t) sums[t] += cube(0, 0, t);
  }
  double chi2 = 0.0;
  for (std::size_t t = 0; t < dims.bins; ++t) {
    const double expected = reps * rate[t];
    chi2 += (sums[t] - expected) * (sums[t] - expected) / expected;
  }
  const boost::math::chi_squared dist(double(dims.bins));
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));
  CHECK(p > 0.01);
}

TEST_CASE("calibration fixes signal and background photon budgets") {
  LayeredSceneOptions opt;
  opt.dims = {16, 16, 2, 64};
  opt.signatures = default_signatures(2, 2);
  const auto scene = make_layered_scene(opt);
  const Irf irf = Irf::gaussian(2, 1.0);
  const double ppp = 20.0, sbr = 3.0;
  auto [cal, bg] = calibrate(scene, irf, BackgroundSpec::exponential_decay(opt.dims, 1.0, 20.0), ppp, sbr);
  double signal = 0.0;
  for (std::size_t n = 0; n < opt.dims.pixels(); ++n)
    for (const auto& s : cal.pixel(n))
      for (std::size_t l = 0; l < 2; ++l)
        for (long d = irf.min_delay(); d <= irf.max_delay(); ++d)
          if (s.depth + d >= 0 && s.depth + d < 64) signal += s.reflectivity[l] * irf.at(l, d);
  CHECK(signal / double(cal.occupied_pixels() * 2) == doctest::Approx(ppp * sbr / (1.0 + sbr)));
  double background = 0.0;
  for (std::size_t n = 0; n < opt.dims.pixels(); ++n)
    for (std::size_t t = 0; t < 64; ++t) background += bg.rate(n, t);
  CHECK(background / double(opt.dims.pixels()) == doctest::Approx(ppp / (1.0 + sbr)));
}

TEST_CASE("infinite sbr leaves bins outside the IRF support empty") {
  LayeredSceneOptions opt;
  opt.dims = {12, 12, 1, 96};
  const auto scene = make_layered_scene(opt);
  const Irf irf = Irf::gaussian(1, 1.0, 3.0);
  const auto cube = simulate(scene, irf, BackgroundSpec::uniform(1.0), 200.0, kInfiniteSbr, 5);
  std::size_t outside = 0;
  for (std::size_t n = 0; n < opt.dims.pixels(); ++n) {
    for (std::size_t t = 0; t < opt.dims.bins; ++t) {
      bool inside = false;
      for (const auto& s : scene.pixel(n)) {
        const long delay = long(t) - s.depth;
        inside = inside || (delay >= irf.min_delay() && delay <= irf.max_delay());
      }
      if (!inside) outside += cube(n, 0, t);
    }
  }
  CHECK(outside == 0);
  CHECK(cube.total() > 0);
}

TEST_CASE("simulation is deterministic in the seed") {
  LayeredSceneOptions opt;
  opt.dims = {10, 10, 1, 48};
  const auto scene = make_layered_scene(opt);
  const Irf irf = Irf::gaussian(1, 1.0);
  const auto a = simulate(scene, irf, BackgroundSpec::uniform(1.0), 8.0, 1.0, 42);
  const auto b = simulate(scene, irf, BackgroundSpec::uniform(1.0), 8.0, 1.0, 42);
  const auto c = simulate(scene, irf, BackgroundSpec::uniform(1.0), 8.0, 1.0, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("simulate rejects invalid requests") {
  const CubeDims dims{2, 2, 2, 16};
  const auto scene = single_surface(dims, 4, 1.0);
  const Irf irf2 = Irf::gaussian(2, 1.0);
  CHECK_THROWS_AS(simulate(scene, irf2, BackgroundSpec::uniform(1.0), 0.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(simulate(scene, irf2, BackgroundSpec::uniform(1.0), -1.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(simulate(scene, irf2, BackgroundSpec::uniform(1.0), 4.0, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(simulate(scene, irf2, BackgroundSpec::uniform(1.0), 4.0, -2.0, 1), ValidationError);
  CHECK_THROWS_AS(simulate(scene, Irf::gaussian(1, 1.0), BackgroundSpec::uniform(1.0), 4.0, 1.0, 1),
                  ValidationError);
  GroundTruthScene bad(dims, 1);
  bad.pixel(0).push_back({40, {1.0, 1.0}, 0});
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("layered scene carries two depth-sorted returns per pixel") {
  LayeredSceneOptions opt;
  opt.dims = {32, 32, 3, 128};
  opt.signatures = default_signatures(3, 3);
  const auto scene = make_layered_scene(opt);
  CHECK_NOTHROW(scene.validate());
  CHECK(scene.surface_count() == 2 * opt.dims.pixels());
  std::size_t labels_seen = 0;
  std::vector<bool> seen(3, false);
  for (std::size_t n = 0; n < opt.dims.pixels(); ++n) {
    REQUIRE(scene.pixel(n).size() == 2);
    CHECK(scene.pixel(n)[0].depth < scene.pixel(n)[1].depth);
    for (const auto& s : scene.pixel(n)) seen[std::size_t(s.label)] = true;
  }
  for (bool b : seen) labels_seen += b;
  CHECK(labels_seen == 3);
}

TEST_CASE("binary cube round trip is bit exact") {
  fixture::TempDir dir;
  const auto cube = random_cube({4, 4, 2, 8}, 9);
  store_cube(cube, dir / "a.lshc");
  const auto back = load_cube(dir / "a.lshc");
  CHECK(back == cube);
  CHECK(back.bin_width() == cube.bin_width());
  store_cube(back, dir / "b.lshc");
  CHECK(fixture::slurp(dir / "a.lshc") == fixture::slurp(dir / "b.lshc"));
  CHECK(fixture::slurp(dir / "a.lshc").size() == 4 + 4 + 16 + 8 + 4 * 4 * 2 * 8 * 4);
}

TEST_CASE("corrupt cube files are rejected") {
  const auto cube = random_cube({4, 4, 2, 8}, 10);
  std::ostringstream out;
  write_cube(cube, out);
  const std::string bytes = out.str();
  for (std::size_t cut : {std::size_t(3), std::size_t(20), bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut));
    CHECK_THROWS_AS(read_cube(in), FormatError);
  }
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream in1(bad_magic);
  CHECK_THROWS_AS(read_cube(in1), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 7;
  std::istringstream in2(bad_version);
  CHECK_THROWS_AS(read_cube(in2), FormatError);
  std::istringstream in3(bytes + "junk");
  CHECK_THROWS_AS(read_cube(in3), FormatError);
  CHECK_THROWS(load_cube("/nonexistent/cube.lshc"));
}

TEST_CASE("sparse events accumulate by key") {
  const std::string text =
      "# dims 3 2 2 5\n"
      "0 0 0 1 2\n"
      "2 1 1 4 7   # trailing comment\n"
      "\n"
      "0 0 0 1 3\n"
      "1 0 1 0 1\n"
      "2 1 1 4 1\n";
  std::map<std::tuple<int, int, int, int>, std::uint32_t> oracle;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream f(line);
    int r, c, l, t;
    std::uint32_t n;
    if (f >> r >> c >> l >> t >> n) oracle[{r, c, l, t}] += n;
  }
  std::istringstream in(text);
  const auto cube = read_sparse_events(in);
  CHECK(cube.dims() == CubeDims{3, 2, 2, 5});
  std::uint64_t total = 0;
  for (const auto& [key, n] : oracle) {
    const auto [r, c, l, t] = key;
    CHECK(cube(r, c, l, t) == n);
    total += n;
  }
  CHECK(cube.total() == total);

  std::istringstream no_dims("1 2 0 3 4\n");
  CHECK(read_sparse_events(no_dims).dims() == CubeDims{2, 3, 1, 4});
  std::istringstream bad("1 2 x 3 4\n");
  CHECK_THROWS_AS(read_sparse_events(bad), FormatError);
  std::istringstream out_of_range("# dims 1 1 1 2\n0 0 0 5 1\n");
  CHECK_THROWS(read_sparse_events(out_of_range));
}

TEST_CASE("sparse-event files load through the common entry point") {
  fixture::TempDir dir;
  const auto cube = random_cube({3, 2, 2, 6}, 12);
  {
    std::ofstream out(dir / "events.txt");
    write_sparse_events(cube, out);
  }
  CHECK(load_cube(dir / "events.txt") == cube);
}

}  // TEST_SUITE
