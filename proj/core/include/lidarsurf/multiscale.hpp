#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lidarsurf/cube.hpp"
#include "lidarsurf/irf.hpp"

namespace lidarsurf {

// Q uniform spatial kernels with their saliency weights lambda_q.
struct KernelSet {
  std::vector<std::size_t> sizes;  // odd, strictly increasing
  std::vector<double> weights;     // non-negative, sum to one

  static KernelSet uniform(std::vector<std::size_t> sizes);
  // Q = 4 (1, 5, 7, 11), equal weights.
  static KernelSet simulation_default();
  // Q = 4 (1, 3, 7, 9), weights (0, 1, 0, 0).
  static KernelSet real_data_default();

  std::size_t size() const { return sizes.size(); }
  void validate() const;
};

// Y^q for every kernel, each with the input dimensions.
struct MultiscaleStack {
  KernelSet kernels;
  std::vector<RealCube> scales;

  std::size_t size() const { return scales.size(); }
  const CubeDims& dims() const { return scales.front().dims(); }
  const RealCube& coarsest() const { return scales.back(); }
};

// Spatial mean over a size x size window per (wavelength, bin); windows are
// clipped at the image border and renormalized by the in-image pixel count.
RealCube box_mean(const HistogramCube& cube, std::size_t size);

MultiscaleStack build_multiscale(const HistogramCube& cube, const KernelSet& kernels);

// out[t] = sum_j in[t + j - offset] * g[j], truncated at the histogram ends.
// A copy of g placed with its delay-0 entry at bin d peaks at out[d].
void correlate(std::span<const double> in, std::span<const double> g, std::size_t offset,
               std::span<double> out);

// Per-wavelength IRF correlation of every histogram.
RealCube matched_filter(const RealCube& cube, const Irf& irf);

}  // namespace lidarsurf
