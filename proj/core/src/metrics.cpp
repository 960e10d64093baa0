#include "lidarsurf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

void PointCloud::validate() const {
  require(rows > 0 && cols > 0 && wavelengths > 0, "point cloud geometry must be non-empty");
  require(std::isfinite(bin_width) && bin_width >= 0.0, "bin width must be non-negative");
  for (const CloudPoint& p : points) {
    require(p.row < rows && p.col < cols, "point lies outside the pixel grid");
    require(std::isfinite(p.depth), "point depth must be finite");
    if (bins > 0)
      require(p.depth >= 0.0 && p.depth < static_cast<double>(bins), "point depth out of range");
    require(p.intensity.size() == wavelengths, "point intensity needs one entry per wavelength");
    for (double v : p.intensity) require(std::isfinite(v) && v >= 0.0, "intensity must be >= 0");
  }
}

PointCloud scene_cloud(const GroundTruthScene& scene, double bin_width) {
  const CubeDims& dims = scene.dims();
  PointCloud cloud{dims.rows, dims.cols, dims.wavelengths, dims.bins, bin_width, {}};
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      const auto& surfs = scene.pixel(r, c);
      for (std::size_t k = 0; k < surfs.size(); ++k) {
        CloudPoint p;
        p.row = r;
        p.col = c;
        p.slot = k;
        p.depth = static_cast<double>(surfs[k].depth);
        p.intensity = surfs[k].reflectivity;
        p.label = surfs[k].label;
        p.gain = 1.0;
        cloud.points.push_back(std::move(p));
      }
    }
  }
  return cloud;
}

PointCloud estimate_cloud(const SurfaceSet& surfaces, const ModelState& state, double bin_width) {
  require(state.surfaces == surfaces.size(), "model state does not match the surface set");
  PointCloud cloud{surfaces.rows(), surfaces.cols(), surfaces.wavelengths(), surfaces.bins(),
                   bin_width, {}};
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    if (!state.present[s]) continue;
    const Surface& surf = surfaces[s];
    CloudPoint p;
    p.row = surf.row;
    p.col = surf.col;
    p.slot = surf.slot;
    p.depth = static_cast<double>(state.depth[s]);
    p.gain = state.h[s];
    p.label = static_cast<long>(state.label[s]);
    p.intensity.resize(state.wavelengths);
    for (std::size_t l = 0; l < state.wavelengths; ++l)
      p.intensity[l] = state.h[s] * state.r[state.ri(s, l)];
    cloud.points.push_back(std::move(p));
  }
  return cloud;
}

Matching match_points(const PointCloud& est, const PointCloud& gt, double tau) {
  require(!std::isnan(tau) && tau >= 0.0, "tau must be non-negative");
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
      by_pixel;
  for (std::size_t i = 0; i < est.points.size(); ++i)
    by_pixel[{est.points[i].row, est.points[i].col}].first.push_back(i);
  for (std::size_t j = 0; j < gt.points.size(); ++j)
    by_pixel[{gt.points[j].row, gt.points[j].col}].second.push_back(j);

  Matching m;
  std::vector<std::uint8_t> est_used(est.points.size(), 0), gt_used(gt.points.size(), 0);
  for (const auto& [pixel, lists] : by_pixel) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t i : lists.first) {
      for (std::size_t j : lists.second) {
        const double gap = std::abs(est.points[i].depth - gt.points[j].depth);
        if (gap <= tau) cand.emplace_back(gap, i, j);
      }
    }
    std::sort(cand.begin(), cand.end());
    for (const auto& [gap, i, j] : cand) {
      if (est_used[i] || gt_used[j]) continue;
      est_used[i] = gt_used[j] = 1;
      m.pairs.emplace_back(i, j);
    }
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  for (std::size_t i = 0; i < est.points.size(); ++i)
    if (!est_used[i]) m.unmatched_est.push_back(i);
  for (std::size_t j = 0; j < gt.points.size(); ++j)
    if (!gt_used[j]) m.unmatched_gt.push_back(j);
  return m;
}

EvalReport evaluate(const PointCloud& est, const PointCloud& gt, double tau) {
  require(!gt.points.empty(), "ground truth is empty; f_true is undefined");
  require(est.rows == gt.rows && est.cols == gt.cols && est.wavelengths == gt.wavelengths,
          "estimate and ground truth have different geometry");
  est.validate();
  gt.validate();

  const Matching m = match_points(est, gt, tau);
  EvalReport rep;
  rep.tau = tau;
  rep.matched = m.pairs.size();
  rep.gt_count = gt.points.size();
  rep.est_count = est.points.size();
  rep.f_true = static_cast<double>(rep.matched) / static_cast<double>(rep.gt_count);
  rep.f_false = m.unmatched_est.size();

  auto sum_abs = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  double iae = 0.0, dae = 0.0;
  std::size_t labelled = 0, correct = 0;
  for (const auto& [i, j] : m.pairs) {
    const CloudPoint& e = est.points[i];
    const CloudPoint& g = gt.points[j];
    for (std::size_t l = 0; l < gt.wavelengths; ++l) iae += std::abs(e.intensity[l] - g.intensity[l]);
    dae += std::abs(e.depth - g.depth);
    if (e.label >= 0 && g.label >= 0) {
      ++labelled;
      if (e.label == g.label) ++correct;
    }
  }
  for (std::size_t i : m.unmatched_est) iae += sum_abs(est.points[i].intensity);
  for (std::size_t j : m.unmatched_gt) iae += sum_abs(gt.points[j].intensity);
  rep.iae = iae / static_cast<double>(rep.gt_count);
  rep.dae = rep.matched > 0 ? dae / static_cast<double>(rep.matched) : 0.0;
  if (labelled > 0) rep.accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
  return rep;
}

std::vector<EvalReport> sweep(const PointCloud& est, const PointCloud& gt, std::vector<double> taus) {
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  std::vector<EvalReport> out;
  out.reserve(taus.size());
  for (double tau : taus) out.push_back(evaluate(est, gt, tau));
  return out;
}

double bins_to_mm(double bins, double bin_width) {
  constexpr double kSpeedOfLight = 299792458.0;
  return bins * bin_width * kSpeedOfLight / 2.0 * 1e3;
}

}  // namespace lidarsurf
