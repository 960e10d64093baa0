#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "lidarsurf/bayes.hpp"
#include "lidarsurf/scene.hpp"
#include "lidarsurf/surfaces.hpp"

namespace lidarsurf {

struct CloudPoint {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t slot = 0;
  double depth = 0.0;              // bins
  std::vector<double> intensity;   // I_l = h r_l, one per wavelength
  long label = -1;                 // -1 when unlabelled
  double gain = 0.0;
};

struct PointCloud {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t wavelengths = 0;
  std::size_t bins = 0;
  double bin_width = 0.0;  // seconds, 0 when unknown
  std::vector<CloudPoint> points;

  // Throws ValidationError unless points lie in the grid, depths lie in
  // [0, bins) when bins > 0, and intensities are non-negative with one entry
  // per wavelength.
  void validate() const;
};

// Ground truth in photon units (use the calibrated scene).
PointCloud scene_cloud(const GroundTruthScene& scene, double bin_width = 0.0);
// Estimates of every present surface: depth d_s, intensity h_s r_{s,l}, label u_s.
PointCloud estimate_cloud(const SurfaceSet& surfaces, const ModelState& state,
                          double bin_width = 0.0);

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (est, gt)
  std::vector<std::size_t> unmatched_est;
  std::vector<std::size_t> unmatched_gt;
};

// Per pixel, greedy one-to-one matching by ascending |depth gap| <= tau; ties by
// estimate then ground-truth index.
Matching match_points(const PointCloud& est, const PointCloud& gt, double tau);

struct EvalReport {
  double tau = 0.0;  // bins
  double f_true = 0.0;
  std::size_t f_false = 0;
  double iae = 0.0;
  double dae = 0.0;  // bins
  std::optional<double> accuracy;
  std::size_t matched = 0;
  std::size_t gt_count = 0;
  std::size_t est_count = 0;
};

// Throws ValidationError on empty ground truth or mismatched geometry.
EvalReport evaluate(const PointCloud& est, const PointCloud& gt, double tau);
// Reports in ascending tau order.
std::vector<EvalReport> sweep(const PointCloud& est, const PointCloud& gt, std::vector<double> taus);

// Bins to millimetres from the bin width in seconds: t c / 2.
double bins_to_mm(double bins, double bin_width);

}  // namespace lidarsurf
