#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lidarsurf/cube.hpp"
#include "lidarsurf/multiscale.hpp"

namespace lidarsurf {

// Background level b_hat(n, l, t) = max(spatial(n, l) + temporal(l, t) - grand_mean(l), 0),
// or an explicit dense field when built with from_dense().
class BackgroundEstimate {
 public:
  BackgroundEstimate() = default;

  // spatial is pixels x wavelengths, temporal is wavelengths x bins.
  static BackgroundEstimate from_shapes(CubeDims dims, std::vector<double> spatial,
                                        std::vector<double> temporal);
  static BackgroundEstimate from_dense(RealCube values);

  const CubeDims& dims() const { return dims_; }
  bool is_dense() const { return dense_.has_value(); }

  double at(std::size_t pixel, std::size_t wavelength, std::size_t bin) const {
    if (dense_) return (*dense_)(pixel, wavelength, bin);
    const double v = spatial_[pixel * dims_.wavelengths + wavelength] +
                     temporal_[wavelength * dims_.bins + bin] - grand_mean_[wavelength];
    return v > 0.0 ? v : 0.0;
  }

  std::span<const double> spatial() const { return spatial_; }
  std::span<const double> temporal() const { return temporal_; }
  std::span<const double> grand_mean() const { return grand_mean_; }

  RealCube materialize() const;

 private:
  CubeDims dims_{};
  std::vector<double> spatial_;
  std::vector<double> temporal_;
  std::vector<double> grand_mean_;
  std::optional<RealCube> dense_;
};

// Median with the midpoint convention for even counts. Reorders `values`.
double median_inplace(std::span<double> values);

// The floor(10%) pixels with the lowest total energy sum_{l,t} y(n, l, t); ties go
// to the lower pixel index. Result is sorted by pixel index.
std::vector<std::size_t> lowest_energy_pixels(const RealCube& cube, double fraction = 0.1);

// Temporal shape from the lowest-energy pixels, spatial shape as the per-pixel
// median over bins, both from the coarsest scale.
BackgroundEstimate estimate_background(const RealCube& coarsest);
BackgroundEstimate estimate_background(const MultiscaleStack& stack);

}  // namespace lidarsurf
