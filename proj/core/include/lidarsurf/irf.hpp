#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lidarsurf {

// Normalized per-wavelength impulse response g_l. Entry j of a response holds
// g_l(j - offset), so delay 0 sits at index `offset`. All wavelengths share one
// window length.
class Irf {
 public:
  Irf() = default;
  // Validates non-negativity and unit sum (1e-9) for every wavelength.
  Irf(std::vector<std::vector<double>> responses, std::size_t offset);

  // Rescales each response to unit sum before validating.
  static Irf normalized(std::vector<std::vector<double>> responses, std::size_t offset);
  // Sampled Gaussian truncated at +-half_width_sigmas, renormalized.
  static Irf gaussian(std::size_t wavelengths, double sigma_bins,
                      double half_width_sigmas = 4.0);
  static Irf delta(std::size_t wavelengths);

  std::size_t wavelengths() const { return responses_.size(); }
  std::size_t length() const { return length_; }
  std::size_t offset() const { return offset_; }
  int min_delay() const { return -static_cast<int>(offset_); }
  int max_delay() const { return static_cast<int>(length_ - 1 - offset_); }

  std::span<const double> response(std::size_t wavelength) const {
    return responses_[wavelength];
  }
  // g_l(delay), zero outside the window.
  double at(std::size_t wavelength, long delay) const;

  // Full width at half maximum in bins (linear interpolation), max over wavelengths.
  double fwhm() const;

  friend bool operator==(const Irf&, const Irf&) = default;

 private:
  std::vector<std::vector<double>> responses_;
  std::size_t offset_ = 0;
  std::size_t length_ = 0;
};

}  // namespace lidarsurf
