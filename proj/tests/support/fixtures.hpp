#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "lidarsurf/graph.hpp"
#include "lidarsurf/irf.hpp"
#include "lidarsurf/surfaces.hpp"
#include "lidarsurf/synthetic.hpp"

namespace fixture {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("lidarsurf_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RandomSurfaceOptions {
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t wavelengths = 3;
  std::size_t max_surfaces = 2;
  std::size_t bins = 64;
  std::size_t classes = 3;
  std::size_t window = 11;
  double absent_probability = 0.2;
  double photon_scale = 20.0;
  double irf_sigma = 1.0;
};

// Surfaces with Poisson clean histograms h m_k g(t - d), as left by scale
// selection. Classes are drawn uniformly.
inline lidarsurf::SurfaceSet random_surfaces(std::uint64_t seed, const RandomSurfaceOptions& o = {}) {
  using namespace lidarsurf;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Irf irf = Irf::gaussian(o.wavelengths, o.irf_sigma);
  const auto sig = default_signatures(o.classes, o.wavelengths);
  SurfaceSet set(o.rows, o.cols, o.wavelengths, o.bins, o.max_surfaces, irf);
  const long half = static_cast<long>(o.window / 2);
  const long spacing = static_cast<long>(o.bins / o.max_surfaces);
  for (std::size_t r = 0; r < o.rows; ++r) {
    for (std::size_t c = 0; c < o.cols; ++c) {
      for (std::size_t k = 0; k < o.max_surfaces; ++k) {
        Surface& s = set[set.index(r, c, k)];
        if (unit(rng) < o.absent_probability) continue;
        s.present = true;
        s.depth = half + static_cast<long>(k) * spacing +
                  static_cast<long>(unit(rng) * double(spacing - 2 * half - 1));
        s.depth_global = s.depth;
        s.window_start = static_cast<std::size_t>(s.depth - half);
        s.window_length = o.window;
        s.run_start = s.run_end = static_cast<std::size_t>(s.depth);
        s.selected_scale = 1;
        const std::size_t cls = std::min(o.classes - 1, std::size_t(unit(rng) * double(o.classes)));
        const double h = o.photon_scale * (0.5 + unit(rng));
        s.clean.assign(o.wavelengths * o.window, 0.0);
        for (std::size_t l = 0; l < o.wavelengths; ++l) {
          for (std::size_t i = 0; i < o.window; ++i) {
            const double rate = h * sig[cls][l] * irf.at(l, long(s.window_start + i) - s.depth);
            if (rate > 0.0) s.clean[l * o.window + i] = std::poisson_distribution<int>(rate)(rng);
          }
        }
        s.energy = 0.0;
        for (double v : s.clean) s.energy += v;
      }
    }
  }
  return set;
}

}  // namespace fixture
