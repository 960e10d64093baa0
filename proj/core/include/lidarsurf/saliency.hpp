#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lidarsurf/background.hpp"
#include "lidarsurf/cube.hpp"
#include "lidarsurf/irf.hpp"
#include "lidarsurf/multiscale.hpp"

namespace lidarsurf {

// Pixels x bins saliency scores, bin index contiguous.
struct SaliencyMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  std::size_t pixels() const { return rows * cols; }
  double at(std::size_t pixel, std::size_t bin) const { return values[pixel * bins + bin]; }
  std::span<const double> pixel(std::size_t n) const { return {values.data() + n * bins, bins}; }
};

// Weighted multiscale matched-filter response of one pixel:
// out(l, t) = sum_q lambda_q (Y^q_l correlated with g_l)(t), wavelength-major.
void filtered_response(const MultiscaleStack& stack, const Irf& irf, const KernelSet& kernels,
                       std::size_t pixel, std::span<double> out);

// S(n, t) = | sum_l [ sum_q lambda_q (Y^q_l * g_l)(n, t) - b_hat(n, l, t) ] |.
SaliencyMatrix compute_saliency(const MultiscaleStack& stack, const Irf& irf,
                                const BackgroundEstimate& background, const KernelSet& kernels);

struct GammaFit {
  double shape = 1.0;  // alpha_b
  double scale = 1.0;  // beta_b
};

// Method-of-moments fit on the strictly positive samples (zeros are dropped).
// Needs >= 30 positive samples with non-zero variance.
GammaFit fit_gamma(std::span<const double> samples);

inline constexpr std::size_t kMinGammaSamples = 30;

// x with P(Gamma(shape, scale) > x) = pfa, by bisection on the regularized
// incomplete gamma function to 1e-10 absolute.
double threshold_for_pfa(const GammaFit& fit, double pfa);

// Binary rows x cols x bins map M.
struct DetectionMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bins = 0;
  std::vector<std::uint8_t> values;

  std::size_t pixels() const { return rows * cols; }
  bool at(std::size_t pixel, std::size_t bin) const { return values[pixel * bins + bin] != 0; }
  std::size_t kept() const;
  // Kept voxels over rows * cols * bins.
  double kept_fraction() const;

  friend bool operator==(const DetectionMap&, const DetectionMap&) = default;
};

DetectionMap empty_map(std::size_t rows, std::size_t cols, std::size_t bins);

// m = (s > threshold).
DetectionMap binarize(const SaliencyMatrix& saliency, double threshold);

// Everything produced by the detection stage.
struct DetectionResult {
  MultiscaleStack stack;
  BackgroundEstimate background;
  SaliencyMatrix saliency;
  std::optional<GammaFit> fit;  // empty when too few positive saliency values
  double threshold = 0.0;
  DetectionMap map;
};

// Multiscale stack, background, saliency, gamma fit and thresholding in one call.
DetectionResult detect(const HistogramCube& cube, const Irf& irf, const KernelSet& kernels,
                       double pfa);

}  // namespace lidarsurf
