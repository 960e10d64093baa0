#include "lidarsurf/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidarsurf/error.hpp"
#include "lidarsurf/parallel.hpp"

namespace lidarsurf {

KernelSet KernelSet::uniform(std::vector<std::size_t> sizes) {
  KernelSet set;
  set.weights.assign(sizes.size(), sizes.empty() ? 0.0 : 1.0 / double(sizes.size()));
  set.sizes = std::move(sizes);
  set.validate();
  return set;
}

KernelSet KernelSet::simulation_default() { return uniform({1, 5, 7, 11}); }

KernelSet KernelSet::real_data_default() {
  KernelSet set{{1, 3, 7, 9}, {0.0, 1.0, 0.0, 0.0}};
  set.validate();
  return set;
}

void KernelSet::validate() const {
  require(!sizes.empty(), "kernel set needs at least one scale");
  require(weights.size() == sizes.size(), "kernel set needs one weight per scale");
  double sum = 0.0;
  for (std::size_t q = 0; q < sizes.size(); ++q) {
    require(sizes[q] >= 1 && sizes[q] % 2 == 1, "kernel sizes must be odd and >= 1");
    if (q > 0) require(sizes[q] > sizes[q - 1], "kernel sizes must be strictly increasing");
    require(std::isfinite(weights[q]) && weights[q] >= 0.0, "kernel weights must be >= 0");
    sum += weights[q];
  }
  require(std::abs(sum - 1.0) <= 1e-9, "kernel weights must sum to one");
}

RealCube box_mean(const HistogramCube& cube, std::size_t size) {
  require(size >= 1 && size % 2 == 1, "kernel size must be odd and >= 1");
  const CubeDims& d = cube.dims();
  require(size <= std::min(d.rows, d.cols), "kernel larger than the image");
  if (size == 1) return to_real(cube);

  const std::size_t half = size / 2;
  const std::size_t block = d.wavelengths * d.bins;

  // Horizontal window sums.
  std::vector<double> rows_pass(d.voxels(), 0.0);
  parallel_for(0, d.rows, [&](std::size_t r) {
    for (std::size_t c = 0; c < d.cols; ++c) {
      const std::size_t lo = c >= half ? c - half : 0;
      const std::size_t hi = std::min(d.cols - 1, c + half);
      double* dst = rows_pass.data() + d.pixel(r, c) * block;
      for (std::size_t cc = lo; cc <= hi; ++cc) {
        const auto src = cube.pixel_block(d.pixel(r, cc));
        for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
      }
    }
  });

  // Vertical window sums, renormalized by the clipped window area.
  RealCube out(d, cube.bin_width());
  parallel_for(0, d.rows, [&](std::size_t r) {
    const std::size_t rlo = r >= half ? r - half : 0;
    const std::size_t rhi = std::min(d.rows - 1, r + half);
    for (std::size_t c = 0; c < d.cols; ++c) {
      const std::size_t clo = c >= half ? c - half : 0;
      const std::size_t chi = std::min(d.cols - 1, c + half);
      const double area = double((rhi - rlo + 1) * (chi - clo + 1));
      auto dst = out.pixel_block(d.pixel(r, c));
      for (std::size_t rr = rlo; rr <= rhi; ++rr) {
        const double* src = rows_pass.data() + d.pixel(rr, c) * block;
        for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
      }
      for (double& v : dst) v /= area;
    }
  });
  return out;
}

MultiscaleStack build_multiscale(const HistogramCube& cube, const KernelSet& kernels) {
  kernels.validate();
  const CubeDims& d = cube.dims();
  require(kernels.sizes.back() <= std::min(d.rows, d.cols), "kernel larger than the image");
  MultiscaleStack stack;
  stack.kernels = kernels;
  stack.scales.reserve(kernels.size());
  for (std::size_t size : kernels.sizes) stack.scales.push_back(box_mean(cube, size));
  return stack;
}

void correlate(std::span<const double> in, std::span<const double> g, std::size_t offset,
               std::span<double> out) {
  const long bins = static_cast<long>(in.size());
  const long width = static_cast<long>(g.size());
  const long off = static_cast<long>(offset);
  for (long t = 0; t < bins; ++t) {
    const long jlo = std::max(0L, off - t);
    const long jhi = std::min(width - 1, bins - 1 - t + off);
    double acc = 0.0;
    for (long j = jlo; j <= jhi; ++j) acc += in[std::size_t(t + j - off)] * g[std::size_t(j)];
    out[std::size_t(t)] = acc;
  }
}

RealCube matched_filter(const RealCube& cube, const Irf& irf) {
  const CubeDims& d = cube.dims();
  require(irf.wavelengths() == d.wavelengths, "IRF wavelength count does not match the cube");
  require(irf.length() <= d.bins, "IRF longer than the histogram");
  RealCube out(d, cube.bin_width());
  parallel_for(0, d.pixels(), [&](std::size_t n) {
    for (std::size_t l = 0; l < d.wavelengths; ++l)
      correlate(cube.histogram(n, l), irf.response(l), irf.offset(), out.histogram(n, l));
  });
  return out;
}

}  // namespace lidarsurf
