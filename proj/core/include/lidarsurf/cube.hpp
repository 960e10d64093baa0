#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

struct CubeDims {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t wavelengths = 0;
  std::size_t bins = 0;

  std::size_t pixels() const { return rows * cols; }
  std::size_t voxels() const { return rows * cols * wavelengths * bins; }
  bool valid() const { return rows > 0 && cols > 0 && wavelengths > 0 && bins > 0; }
  std::size_t pixel(std::size_t row, std::size_t col) const { return row * cols + col; }

  friend bool operator==(const CubeDims&, const CubeDims&) = default;
};

// Dense (row, col, wavelength, bin) tensor with the bin index contiguous.
// Pixel n = row * cols + col.
template <typename T>
class Cube {
 public:
  using value_type = T;

  Cube() = default;

  explicit Cube(CubeDims dims, double bin_width = 0.0)
      : dims_(dims), bin_width_(bin_width), data_(dims.voxels(), T{}) {
    require(dims.valid(), "cube dimensions must all be >= 1");
  }

  Cube(CubeDims dims, std::vector<T> data, double bin_width = 0.0)
      : dims_(dims), bin_width_(bin_width), data_(std::move(data)) {
    require(dims.valid(), "cube dimensions must all be >= 1");
    require(data_.size() == dims.voxels(), "cube payload size does not match dimensions");
  }

  const CubeDims& dims() const { return dims_; }
  double bin_width() const { return bin_width_; }

  std::size_t index(std::size_t pixel, std::size_t wavelength, std::size_t bin) const {
    return (pixel * dims_.wavelengths + wavelength) * dims_.bins + bin;
  }

  T& operator()(std::size_t pixel, std::size_t wavelength, std::size_t bin) {
    return data_[index(pixel, wavelength, bin)];
  }
  const T& operator()(std::size_t pixel, std::size_t wavelength, std::size_t bin) const {
    return data_[index(pixel, wavelength, bin)];
  }
  T& operator()(std::size_t row, std::size_t col, std::size_t wavelength, std::size_t bin) {
    return (*this)(dims_.pixel(row, col), wavelength, bin);
  }
  const T& operator()(std::size_t row, std::size_t col, std::size_t wavelength,
                      std::size_t bin) const {
    return (*this)(dims_.pixel(row, col), wavelength, bin);
  }

  std::span<T> histogram(std::size_t pixel, std::size_t wavelength) {
    return {data_.data() + index(pixel, wavelength, 0), dims_.bins};
  }
  std::span<const T> histogram(std::size_t pixel, std::size_t wavelength) const {
    return {data_.data() + index(pixel, wavelength, 0), dims_.bins};
  }

  // All wavelengths of one pixel, wavelength-major.
  std::span<const T> pixel_block(std::size_t pixel) const {
    return {data_.data() + index(pixel, 0, 0), dims_.wavelengths * dims_.bins};
  }
  std::span<T> pixel_block(std::size_t pixel) {
    return {data_.data() + index(pixel, 0, 0), dims_.wavelengths * dims_.bins};
  }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  auto total() const {
    using Acc = std::conditional_t<std::is_integral_v<T>, std::uint64_t, double>;
    return std::accumulate(data_.begin(), data_.end(), Acc{0});
  }

  auto pixel_total(std::size_t pixel) const {
    using Acc = std::conditional_t<std::is_integral_v<T>, std::uint64_t, double>;
    auto block = pixel_block(pixel);
    return std::accumulate(block.begin(), block.end(), Acc{0});
  }

  friend bool operator==(const Cube&, const Cube&) = default;

 private:
  CubeDims dims_{};
  double bin_width_ = 0.0;
  std::vector<T> data_;
};

// Raw photon counts Y.
using HistogramCube = Cube<std::uint32_t>;
// Filtered / rate volumes.
using RealCube = Cube<double>;

template <typename T>
RealCube to_real(const Cube<T>& cube) {
  std::vector<double> values(cube.data().begin(), cube.data().end());
  return RealCube(cube.dims(), std::move(values), cube.bin_width());
}

}  // namespace lidarsurf
