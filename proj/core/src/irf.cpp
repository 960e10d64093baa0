#include "lidarsurf/irf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

Irf::Irf(std::vector<std::vector<double>> responses, std::size_t offset)
    : responses_(std::move(responses)), offset_(offset) {
  require(!responses_.empty(), "IRF needs at least one wavelength");
  length_ = responses_.front().size();
  require(length_ > 0, "IRF response must not be empty");
  require(offset_ < length_, "IRF offset must lie inside the response window");
  for (const auto& g : responses_) {
    require(g.size() == length_, "IRF responses must share one window length");
    double sum = 0.0;
    for (double v : g) {
      require(std::isfinite(v) && v >= 0.0, "IRF entries must be finite and non-negative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "IRF response must sum to one");
  }
}

Irf Irf::normalized(std::vector<std::vector<double>> responses, std::size_t offset) {
  for (auto& g : responses) {
    const double sum = std::accumulate(g.begin(), g.end(), 0.0);
    require(sum > 0.0, "IRF response has zero mass");
    for (double& v : g) v /= sum;
  }
  return Irf(std::move(responses), offset);
}

Irf Irf::gaussian(std::size_t wavelengths, double sigma_bins, double half_width_sigmas) {
  require(wavelengths > 0, "IRF needs at least one wavelength");
  require(sigma_bins > 0.0 && half_width_sigmas > 0.0, "Gaussian IRF width must be positive");
  const auto half = static_cast<std::size_t>(std::ceil(half_width_sigmas * sigma_bins));
  std::vector<double> g(2 * half + 1);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = static_cast<double>(j) - static_cast<double>(half);
    g[j] = std::exp(-0.5 * x * x / (sigma_bins * sigma_bins));
  }
  return normalized(std::vector<std::vector<double>>(wavelengths, g), half);
}

Irf Irf::delta(std::size_t wavelengths) {
  require(wavelengths > 0, "IRF needs at least one wavelength");
  return Irf(std::vector<std::vector<double>>(wavelengths, std::vector<double>{1.0}), 0);
}

double Irf::at(std::size_t wavelength, long delay) const {
  const long j = delay + static_cast<long>(offset_);
  if (j < 0 || j >= static_cast<long>(length_)) return 0.0;
  return responses_[wavelength][static_cast<std::size_t>(j)];
}

double Irf::fwhm() const {
  double widest = 0.0;
  for (const auto& g : responses_) {
    const auto peak_it = std::max_element(g.begin(), g.end());
    const double half = 0.5 * *peak_it;
    const auto peak = static_cast<std::size_t>(peak_it - g.begin());
    // Walk outwards to the half-maximum crossings.
    double left = -0.5;
    for (std::size_t j = peak; j > 0; --j) {
      if (g[j - 1] < half) {
        left = static_cast<double>(j - 1) + (half - g[j - 1]) / (g[j] - g[j - 1]);
        break;
      }
    }
    if (left < 0.0) left = -0.5;
    double right = static_cast<double>(g.size()) - 0.5;
    for (std::size_t j = peak; j + 1 < g.size(); ++j) {
      if (g[j + 1] < half) {
        right = static_cast<double>(j) + (g[j] - half) / (g[j] - g[j + 1]);
        break;
      }
    }
    widest = std::max(widest, right - left);
  }
  return widest;
}

}  // namespace lidarsurf
