#include "lidarsurf/background.hpp"

#include <algorithm>
#include <numeric>

#include "lidarsurf/error.hpp"
#include "lidarsurf/parallel.hpp"

namespace lidarsurf {

BackgroundEstimate BackgroundEstimate::from_shapes(CubeDims dims, std::vector<double> spatial,
                                                   std::vector<double> temporal) {
  require(dims.valid(), "background dimensions must all be >= 1");
  require(spatial.size() == dims.pixels() * dims.wavelengths, "spatial shape size mismatch");
  require(temporal.size() == dims.wavelengths * dims.bins, "temporal shape size mismatch");
  BackgroundEstimate est;
  est.dims_ = dims;
  est.spatial_ = std::move(spatial);
  est.temporal_ = std::move(temporal);
  est.grand_mean_.assign(dims.wavelengths, 0.0);
  for (std::size_t l = 0; l < dims.wavelengths; ++l) {
    double sum = 0.0;
    for (std::size_t t = 0; t < dims.bins; ++t) sum += est.temporal_[l * dims.bins + t];
    est.grand_mean_[l] = sum / double(dims.bins);
  }
  return est;
}

BackgroundEstimate BackgroundEstimate::from_dense(RealCube values) {
  for (double v : values.data()) require(v >= 0.0, "dense background must be non-negative");
  BackgroundEstimate est;
  est.dims_ = values.dims();
  est.dense_ = std::move(values);
  return est;
}

RealCube BackgroundEstimate::materialize() const {
  if (dense_) return *dense_;
  RealCube out(dims_);
  for (std::size_t n = 0; n < dims_.pixels(); ++n)
    for (std::size_t l = 0; l < dims_.wavelengths; ++l)
      for (std::size_t t = 0; t < dims_.bins; ++t) out(n, l, t) = at(n, l, t);
  return out;
}

double median_inplace(std::span<double> values) {
  require(!values.empty(), "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + long(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + long(mid));
  return 0.5 * (lower + upper);
}

std::vector<std::size_t> lowest_energy_pixels(const RealCube& cube, double fraction) {
  const std::size_t pixels = cube.dims().pixels();
  const auto count = static_cast<std::size_t>(fraction * double(pixels));
  require(count >= 1, "too few pixels for a non-empty lowest-energy background set");
  std::vector<double> energy(pixels);
  for (std::size_t n = 0; n < pixels; ++n) energy[n] = cube.pixel_total(n);
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + long(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return energy[a] < energy[b] || (energy[a] == energy[b] && a < b);
                    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

BackgroundEstimate estimate_background(const RealCube& coarsest) {
  const CubeDims& d = coarsest.dims();
  const auto quiet = lowest_energy_pixels(coarsest);

  std::vector<double> temporal(d.wavelengths * d.bins);
  std::vector<double> scratch(quiet.size());
  for (std::size_t l = 0; l < d.wavelengths; ++l) {
    for (std::size_t t = 0; t < d.bins; ++t) {
      for (std::size_t i = 0; i < quiet.size(); ++i) scratch[i] = coarsest(quiet[i], l, t);
      temporal[l * d.bins + t] = median_inplace(scratch);
    }
  }

  std::vector<double> spatial(d.pixels() * d.wavelengths);
  parallel_for(0, d.pixels(), [&](std::size_t n) {
    std::vector<double> hist(d.bins);
    for (std::size_t l = 0; l < d.wavelengths; ++l) {
      const auto h = coarsest.histogram(n, l);
      std::copy(h.begin(), h.end(), hist.begin());
      spatial[n * d.wavelengths + l] = median_inplace(hist);
    }
  });

  return BackgroundEstimate::from_shapes(d, std::move(spatial), std::move(temporal));
}

BackgroundEstimate estimate_background(const MultiscaleStack& stack) {
  require(stack.size() >= 1, "multiscale stack is empty");
  return estimate_background(stack.coarsest());
}

}  // namespace lidarsurf
