#include "lidarsurf/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "lidarsurf/error.hpp"
#include "lidarsurf/parallel.hpp"

namespace lidarsurf {

void filtered_response(const MultiscaleStack& stack, const Irf& irf, const KernelSet& kernels,
                       std::size_t pixel, std::span<double> out) {
  const CubeDims& d = stack.dims();
  std::vector<double> combined(d.bins);
  for (std::size_t l = 0; l < d.wavelengths; ++l) {
    std::fill(combined.begin(), combined.end(), 0.0);
    for (std::size_t q = 0; q < stack.size(); ++q) {
      const double lambda = kernels.weights[q];
      if (lambda == 0.0) continue;
      const auto h = stack.scales[q].histogram(pixel, l);
      for (std::size_t t = 0; t < d.bins; ++t) combined[t] += lambda * h[t];
    }
    // Correlation is linear, so filtering the weighted sum equals the weighted
    // sum of filtered scales.
    correlate(combined, irf.response(l), irf.offset(), out.subspan(l * d.bins, d.bins));
  }
}

SaliencyMatrix compute_saliency(const MultiscaleStack& stack, const Irf& irf,
                                const BackgroundEstimate& background, const KernelSet& kernels) {
  require(stack.size() >= 1, "multiscale stack is empty");
  kernels.validate();
  require(kernels.size() == stack.size(), "kernel set does not match the multiscale stack");
  const CubeDims& d = stack.dims();
  require(background.dims() == d, "background dimensions do not match the stack");
  require(irf.wavelengths() == d.wavelengths, "IRF wavelength count does not match the cube");
  require(irf.length() <= d.bins, "IRF longer than the histogram");

  SaliencyMatrix s{d.rows, d.cols, d.bins, std::vector<double>(d.pixels() * d.bins, 0.0)};
  parallel_for(0, d.pixels(), [&](std::size_t n) {
    std::vector<double> response(d.wavelengths * d.bins);
    filtered_response(stack, irf, kernels, n, response);
    double* row = s.values.data() + n * d.bins;
    for (std::size_t t = 0; t < d.bins; ++t) {
      double acc = 0.0;
      for (std::size_t l = 0; l < d.wavelengths; ++l)
        acc += response[l * d.bins + t] - background.at(n, l, t);
      row[t] = std::abs(acc);
    }
  });
  return s;
}

GammaFit fit_gamma(std::span<const double> samples) {
  std::size_t count = 0;
  double sum = 0.0;
  for (double x : samples) {
    require(std::isfinite(x) && x >= 0.0, "gamma fit samples must be finite and >= 0");
    if (x > 0.0) {
      ++count;
      sum += x;
    }
  }
  require(count >= kMinGammaSamples, "gamma fit needs at least 30 positive samples");
  const double mean = sum / double(count);
  double ss = 0.0;
  for (double x : samples) {
    if (x > 0.0) ss += (x - mean) * (x - mean);
  }
  const double var = ss / double(count);
  if (!(var > 1e-24 * mean * mean))
    throw ValidationError("degenerate saliency samples: zero variance, not gamma distributed");
  GammaFit fit{mean * mean / var, var / mean};
  if (!(std::isfinite(fit.shape) && std::isfinite(fit.scale) && fit.shape > 0 && fit.scale > 0))
    throw NumericalError("gamma fit produced non-finite parameters");
  return fit;
}

double threshold_for_pfa(const GammaFit& fit, double pfa) {
  require(fit.shape > 0.0 && fit.scale > 0.0, "gamma parameters must be positive");
  require(pfa > 0.0 && pfa < 1.0, "probability of false alarm must lie in (0, 1)");
  auto tail = [&](double x) { return boost::math::gamma_q(fit.shape, x / fit.scale); };

  double lo = 0.0;
  double hi = fit.scale * std::max(1.0, fit.shape);
  while (tail(hi) > pfa) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("could not bracket the gamma quantile");
  }
  for (int it = 0; it < 2000 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // ulp-limited
    if (tail(mid) > pfa)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::size_t DetectionMap::kept() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

double DetectionMap::kept_fraction() const {
  return values.empty() ? 0.0 : double(kept()) / double(values.size());
}

DetectionMap empty_map(std::size_t rows, std::size_t cols, std::size_t bins) {
  return DetectionMap{rows, cols, bins, std::vector<std::uint8_t>(rows * cols * bins, 0)};
}

DetectionMap binarize(const SaliencyMatrix& saliency, double threshold) {
  require(!std::isnan(threshold) && threshold >= 0.0, "threshold must be >= 0");
  DetectionMap map = empty_map(saliency.rows, saliency.cols, saliency.bins);
  for (std::size_t i = 0; i < saliency.values.size(); ++i)
    map.values[i] = saliency.values[i] > threshold ? 1 : 0;
  return map;
}

DetectionResult detect(const HistogramCube& cube, const Irf& irf, const KernelSet& kernels,
                       double pfa) {
  require(pfa > 0.0 && pfa < 1.0, "probability of false alarm must lie in (0, 1)");
  DetectionResult result;
  result.stack = build_multiscale(cube, kernels);
  result.background = estimate_background(result.stack);
  result.saliency = compute_saliency(result.stack, irf, result.background, kernels);

  const auto positive = std::count_if(result.saliency.values.begin(), result.saliency.values.end(),
                                      [](double v) { return v > 0.0; });
  if (static_cast<std::size_t>(positive) < kMinGammaSamples) {
    // Nothing to model: no detections.
    result.threshold = std::numeric_limits<double>::infinity();
    result.map = empty_map(cube.dims().rows, cube.dims().cols, cube.dims().bins);
    return result;
  }
  result.fit = fit_gamma(result.saliency.values);
  result.threshold = threshold_for_pfa(*result.fit, pfa);
  result.map = binarize(result.saliency, result.threshold);
  return result;
}

}  // namespace lidarsurf
