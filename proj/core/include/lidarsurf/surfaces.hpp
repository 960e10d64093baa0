#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lidarsurf/background.hpp"
#include "lidarsurf/irf.hpp"
#include "lidarsurf/multiscale.hpp"
#include "lidarsurf/saliency.hpp"

namespace lidarsurf {

// One detected return: a background-free histogram window around a peak of the
// detection map. Slots of a pixel that hold no return have present == false.
struct Surface {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t slot = 0;
  bool present = false;

  std::size_t run_start = 0;  // detected bins, inclusive
  std::size_t run_end = 0;
  std::size_t window_start = 0;
  std::size_t window_length = 0;
  double energy = 0.0;

  long depth_global = -1;           // argmax over all scales
  long depth = -1;                  // depth at the selected scale
  std::size_t selected_scale = 0;   // 0-based index into the kernel set

  // Clean histogram per scale, each wavelength-major (wavelengths x window_length).
  std::vector<std::vector<double>> scales;
  // Clean histogram at the selected scale.
  std::vector<double> clean;

  std::span<const double> clean_histogram(std::size_t wavelength) const {
    return {clean.data() + wavelength * window_length, window_length};
  }
};

// N_row x N_col x K_s surface slots, stored pixel-major then slot.
class SurfaceSet {
 public:
  SurfaceSet() = default;
  SurfaceSet(std::size_t rows, std::size_t cols, std::size_t wavelengths, std::size_t bins,
             std::size_t max_surfaces, Irf irf);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t wavelengths() const { return wavelengths_; }
  std::size_t bins() const { return bins_; }
  std::size_t max_surfaces() const { return max_surfaces_; }
  std::size_t size() const { return surfaces_.size(); }
  const Irf& irf() const { return irf_; }

  std::size_t index(std::size_t row, std::size_t col, std::size_t slot) const {
    return (row * cols_ + col) * max_surfaces_ + slot;
  }

  Surface& operator[](std::size_t s) { return surfaces_[s]; }
  const Surface& operator[](std::size_t s) const { return surfaces_[s]; }
  std::vector<Surface>& surfaces() { return surfaces_; }
  const std::vector<Surface>& surfaces() const { return surfaces_; }

  std::size_t present_count() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t wavelengths_ = 0;
  std::size_t bins_ = 0;
  std::size_t max_surfaces_ = 0;
  Irf irf_;
  std::vector<Surface> surfaces_;
};

struct BinRun {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
};

// Contiguous true-runs of one pixel; runs whose gap is shorter than
// `merge_gap` bins are merged.
std::vector<BinRun> find_runs(const DetectionMap& map, std::size_t pixel, double merge_gap);

// Groups each pixel's detections into peaks, keeps the max_surfaces most
// energetic ones in depth order and stores max(Y^q * g - b_hat, 0) over a
// window padded by the IRF support, for every scale. Peaks are ranked by the
// lambda-weighted clean response summed over the run.
SurfaceSet extract_surfaces(const DetectionMap& map, const MultiscaleStack& stack,
                            const Irf& irf, const BackgroundEstimate& background,
                            std::size_t max_surfaces);

// Sets depth_global, per-surface selected scale (finest of scales 2..Q whose
// depth is closest to depth_global), depth and clean. Needs >= 2 scales.
SurfaceSet select_scales(SurfaceSet surfaces);

// argmax over d in the window of sum_l sum_t hist(l, t) g_l(t - d), as a bin
// index; ties go to the smallest d.
long window_peak(std::span<const double> hist, std::size_t wavelengths, std::size_t window_start,
                 std::size_t window_length, const Irf& irf);

}  // namespace lidarsurf
