#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "lidarsurf/cube.hpp"
#include "lidarsurf/irf.hpp"

namespace lidarsurf {

struct SceneSurface {
  long depth = 0;                   // bin index, 0-based
  std::vector<double> reflectivity;  // one entry per wavelength
  int label = 0;                     // class index, 0-based
};

// Ground-truth geometry: up to max_surfaces returns per pixel, depth-sorted.
class GroundTruthScene {
 public:
  GroundTruthScene() = default;
  GroundTruthScene(CubeDims dims, std::size_t max_surfaces);

  const CubeDims& dims() const { return dims_; }
  std::size_t max_surfaces() const { return max_surfaces_; }

  std::vector<SceneSurface>& pixel(std::size_t n) { return pixels_[n]; }
  const std::vector<SceneSurface>& pixel(std::size_t n) const { return pixels_[n]; }
  std::vector<SceneSurface>& pixel(std::size_t row, std::size_t col) {
    return pixels_[dims_.pixel(row, col)];
  }
  const std::vector<SceneSurface>& pixel(std::size_t row, std::size_t col) const {
    return pixels_[dims_.pixel(row, col)];
  }

  std::size_t surface_count() const;
  std::size_t occupied_pixels() const;

  // Throws ValidationError unless depths are in range and strictly increasing,
  // reflectivities are non-negative with one entry per wavelength.
  void validate() const;

 private:
  CubeDims dims_{};
  std::size_t max_surfaces_ = 0;
  std::vector<std::vector<SceneSurface>> pixels_;
};

enum class BackgroundShape { uniform, separable };

// Background rate b_{n,t}, identical across wavelengths. For the separable shape
// the rate is level * u_n * v_t with u and v normalized to unit mean, so `level`
// is always the mean background count per voxel.
struct BackgroundSpec {
  BackgroundShape shape = BackgroundShape::uniform;
  double level = 0.0;
  std::vector<double> spatial;   // u_n, one entry per pixel
  std::vector<double> temporal;  // v_t, one entry per bin

  static BackgroundSpec uniform(double level);
  // Profiles are rescaled to unit mean.
  static BackgroundSpec separable(std::vector<double> spatial, std::vector<double> temporal,
                                  double level);
  // Smooth spatial ramp times exponential decay in time, mimicking obscurant
  // backscatter that is strongest at short range.
  static BackgroundSpec exponential_decay(const CubeDims& dims, double level,
                                          double decay_bins, double floor_fraction = 0.2);

  void validate(const CubeDims& dims) const;
  double rate(std::size_t pixel, std::size_t bin) const;
};

constexpr double kInfiniteSbr = std::numeric_limits<double>::infinity();

// Per-voxel Poisson rate sum_c r g(t - d) + b.
RealCube expected_rates(const GroundTruthScene& scene, const Irf& irf,
                        const BackgroundSpec& background);

// Rescales reflectivities and background so the mean signal photons per
// occupied pixel and wavelength is ppp*sbr/(1+sbr) and the mean background
// photons per pixel and wavelength is ppp/(1+sbr). sbr = infinity removes the
// background.
std::pair<GroundTruthScene, BackgroundSpec> calibrate(const GroundTruthScene& scene,
                                                      const Irf& irf,
                                                      const BackgroundSpec& background,
                                                      double ppp, double sbr);

// Poisson sample of the calibrated rates. Deterministic in `seed`.
HistogramCube simulate(const GroundTruthScene& scene, const Irf& irf,
                       const BackgroundSpec& background, double ppp, double sbr,
                       std::uint64_t seed, double bin_width = 0.0);

// Poisson sample of arbitrary rates.
HistogramCube sample_poisson(const RealCube& rates, std::uint64_t seed,
                             std::optional<double> bin_width = std::nullopt);

}  // namespace lidarsurf
