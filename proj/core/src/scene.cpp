#include "lidarsurf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

GroundTruthScene::GroundTruthScene(CubeDims dims, std::size_t max_surfaces)
    : dims_(dims), max_surfaces_(max_surfaces), pixels_(dims.pixels()) {
  require(dims.valid(), "scene dimensions must all be >= 1");
  require(max_surfaces >= 1, "scene needs at least one surface slot per pixel");
}

std::size_t GroundTruthScene::surface_count() const {
  std::size_t count = 0;
  for (const auto& p : pixels_) count += p.size();
  return count;
}

std::size_t GroundTruthScene::occupied_pixels() const {
  return static_cast<std::size_t>(
      std::count_if(pixels_.begin(), pixels_.end(), [](const auto& p) { return !p.empty(); }));
}

void GroundTruthScene::validate() const {
  require(dims_.valid(), "scene dimensions must all be >= 1");
  for (const auto& p : pixels_) {
    require(p.size() <= max_surfaces_, "pixel holds more surfaces than max_surfaces");
    for (std::size_t c = 0; c < p.size(); ++c) {
      const auto& s = p[c];
      require(s.depth >= 0 && s.depth < static_cast<long>(dims_.bins),
              "surface depth outside the histogram range");
      if (c > 0) require(s.depth > p[c - 1].depth, "surface depths must be strictly increasing");
      require(s.reflectivity.size() == dims_.wavelengths,
              "surface reflectivity needs one entry per wavelength");
      for (double r : s.reflectivity)
        require(std::isfinite(r) && r >= 0.0, "reflectivity must be finite and non-negative");
      require(s.label >= 0, "class labels must be non-negative");
    }
  }
}

namespace {

std::vector<double> unit_mean(std::vector<double> profile, const char* what) {
  require(!profile.empty(), what);
  double sum = 0.0;
  for (double v : profile) {
    require(std::isfinite(v) && v >= 0.0, "background profiles must be non-negative");
    sum += v;
  }
  require(sum > 0.0, "background profile has zero mass");
  const double mean = sum / static_cast<double>(profile.size());
  for (double& v : profile) v /= mean;
  return profile;
}

}  // namespace

BackgroundSpec BackgroundSpec::uniform(double level) {
  require(std::isfinite(level) && level >= 0.0, "background level must be >= 0");
  BackgroundSpec spec;
  spec.shape = BackgroundShape::uniform;
  spec.level = level;
  return spec;
}

BackgroundSpec BackgroundSpec::separable(std::vector<double> spatial,
                                         std::vector<double> temporal, double level) {
  require(std::isfinite(level) && level >= 0.0, "background level must be >= 0");
  BackgroundSpec spec;
  spec.shape = BackgroundShape::separable;
  spec.level = level;
  spec.spatial = unit_mean(std::move(spatial), "spatial background profile is empty");
  spec.temporal = unit_mean(std::move(temporal), "temporal background profile is empty");
  return spec;
}

BackgroundSpec BackgroundSpec::exponential_decay(const CubeDims& dims, double level,
                                                 double decay_bins, double floor_fraction) {
  require(dims.valid(), "background dimensions must all be >= 1");
  require(decay_bins > 0.0, "decay constant must be positive");
  std::vector<double> spatial(dims.pixels());
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      const double x = dims.cols > 1 ? double(c) / double(dims.cols - 1) : 0.5;
      const double y = dims.rows > 1 ? double(r) / double(dims.rows - 1) : 0.5;
      spatial[dims.pixel(r, c)] = 0.6 + 0.5 * x + 0.3 * y * y;
    }
  }
  std::vector<double> temporal(dims.bins);
  for (std::size_t t = 0; t < dims.bins; ++t)
    temporal[t] = floor_fraction + std::exp(-double(t) / decay_bins);
  return separable(std::move(spatial), std::move(temporal), level);
}

void BackgroundSpec::validate(const CubeDims& dims) const {
  require(std::isfinite(level) && level >= 0.0, "background level must be >= 0");
  if (shape == BackgroundShape::separable) {
    require(spatial.size() == dims.pixels(), "spatial background profile size mismatch");
    require(temporal.size() == dims.bins, "temporal background profile size mismatch");
    for (double v : spatial) require(v >= 0.0, "background profiles must be non-negative");
    for (double v : temporal) require(v >= 0.0, "background profiles must be non-negative");
  }
}

double BackgroundSpec::rate(std::size_t pixel, std::size_t bin) const {
  if (shape == BackgroundShape::uniform) return level;
  return level * spatial[pixel] * temporal[bin];
}

RealCube expected_rates(const GroundTruthScene& scene, const Irf& irf,
                        const BackgroundSpec& background) {
  scene.validate();
  const CubeDims& dims = scene.dims();
  require(irf.wavelengths() == dims.wavelengths,
          "IRF wavelength count does not match the scene");
  background.validate(dims);

  RealCube rates(dims);
  const long bins = static_cast<long>(dims.bins);
  for (std::size_t n = 0; n < dims.pixels(); ++n) {
    for (std::size_t l = 0; l < dims.wavelengths; ++l) {
      auto h = rates.histogram(n, l);
      for (std::size_t t = 0; t < dims.bins; ++t) h[t] = background.rate(n, t);
      for (const auto& s : scene.pixel(n)) {
        const double r = s.reflectivity[l];
        if (r == 0.0) continue;
        const long lo = std::max(0L, s.depth + irf.min_delay());
        const long hi = std::min(bins - 1, s.depth + irf.max_delay());
        for (long t = lo; t <= hi; ++t) h[std::size_t(t)] += r * irf.at(l, t - s.depth);
      }
    }
  }
  return rates;
}

std::pair<GroundTruthScene, BackgroundSpec> calibrate(const GroundTruthScene& scene,
                                                      const Irf& irf,
                                                      const BackgroundSpec& background,
                                                      double ppp, double sbr) {
  require(std::isfinite(ppp) && ppp > 0.0, "ppp must be positive");
  require(!std::isnan(sbr) && sbr > 0.0, "sbr must be positive (or infinite)");
  scene.validate();
  const CubeDims& dims = scene.dims();
  require(irf.wavelengths() == dims.wavelengths,
          "IRF wavelength count does not match the scene");
  background.validate(dims);

  const bool no_background = std::isinf(sbr);
  const double signal_target = no_background ? ppp : ppp * sbr / (1.0 + sbr);
  const double background_target = no_background ? 0.0 : ppp / (1.0 + sbr);

  // Signal photons actually deposited inside [0, T) by the current reflectivities.
  double signal = 0.0;
  const long bins = static_cast<long>(dims.bins);
  for (std::size_t n = 0; n < dims.pixels(); ++n) {
    for (const auto& s : scene.pixel(n)) {
      for (std::size_t l = 0; l < dims.wavelengths; ++l) {
        double mass = 0.0;
        for (long d = irf.min_delay(); d <= irf.max_delay(); ++d) {
          const long t = s.depth + d;
          if (t >= 0 && t < bins) mass += irf.at(l, d);
        }
        signal += s.reflectivity[l] * mass;
      }
    }
  }

  GroundTruthScene scaled = scene;
  const std::size_t occupied = scene.occupied_pixels();
  if (occupied > 0 && signal > 0.0) {
    const double mean_signal =
        signal / (static_cast<double>(occupied) * static_cast<double>(dims.wavelengths));
    const double factor = signal_target / mean_signal;
    for (std::size_t n = 0; n < dims.pixels(); ++n)
      for (auto& s : scaled.pixel(n))
        for (double& r : s.reflectivity) r *= factor;
  }

  BackgroundSpec bg = background;
  bg.level = background_target / static_cast<double>(dims.bins);
  return {std::move(scaled), std::move(bg)};
}

HistogramCube sample_poisson(const RealCube& rates, std::uint64_t seed,
                             std::optional<double> bin_width) {
  std::mt19937_64 engine(seed);
  std::vector<std::uint32_t> counts(rates.data().size(), 0);
  const auto values = rates.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lambda = values[i];
    require(std::isfinite(lambda) && lambda >= 0.0, "Poisson rates must be finite and >= 0");
    if (lambda <= 0.0) continue;
    std::poisson_distribution<std::uint32_t> draw(lambda);
    counts[i] = draw(engine);
  }
  return HistogramCube(rates.dims(), std::move(counts), bin_width.value_or(rates.bin_width()));
}

HistogramCube simulate(const GroundTruthScene& scene, const Irf& irf,
                       const BackgroundSpec& background, double ppp, double sbr,
                       std::uint64_t seed, double bin_width) {
  auto [scaled, bg] = calibrate(scene, irf, background, ppp, sbr);
  return sample_poisson(expected_rates(scaled, irf, bg), seed, bin_width);
}

}  // namespace lidarsurf
