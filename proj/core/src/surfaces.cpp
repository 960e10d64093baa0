#include "lidarsurf/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lidarsurf/error.hpp"
#include "lidarsurf/parallel.hpp"

namespace lidarsurf {

SurfaceSet::SurfaceSet(std::size_t rows, std::size_t cols, std::size_t wavelengths,
                       std::size_t bins, std::size_t max_surfaces, Irf irf)
    : rows_(rows),
      cols_(cols),
      wavelengths_(wavelengths),
      bins_(bins),
      max_surfaces_(max_surfaces),
      irf_(std::move(irf)),
      surfaces_(rows * cols * max_surfaces) {
  require(rows > 0 && cols > 0 && wavelengths > 0 && bins > 0, "surface set dims must be >= 1");
  require(max_surfaces >= 1, "max_surfaces must be >= 1");
  require(irf_.wavelengths() == wavelengths, "IRF wavelength count does not match");
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t k = 0; k < max_surfaces; ++k) {
        Surface& s = surfaces_[index(r, c, k)];
        s.row = r;
        s.col = c;
        s.slot = k;
      }
}

std::size_t SurfaceSet::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(surfaces_.begin(), surfaces_.end(), [](const Surface& s) { return s.present; }));
}

std::vector<BinRun> find_runs(const DetectionMap& map, std::size_t pixel, double merge_gap) {
  std::vector<BinRun> runs;
  std::size_t t = 0;
  while (t < map.bins) {
    if (!map.at(pixel, t)) {
      ++t;
      continue;
    }
    BinRun run{t, t};
    while (run.end + 1 < map.bins && map.at(pixel, run.end + 1)) ++run.end;
    t = run.end + 1;
    if (!runs.empty() && double(run.start - runs.back().end - 1) < merge_gap)
      runs.back().end = run.end;
    else
      runs.push_back(run);
  }
  return runs;
}

SurfaceSet extract_surfaces(const DetectionMap& map, const MultiscaleStack& stack,
                            const Irf& irf, const BackgroundEstimate& background,
                            std::size_t max_surfaces) {
  require(max_surfaces >= 1, "max_surfaces must be >= 1");
  require(stack.size() >= 1, "multiscale stack is empty");
  const CubeDims& d = stack.dims();
  require(map.rows == d.rows && map.cols == d.cols && map.bins == d.bins,
          "detection map does not match the stack dimensions");
  require(background.dims() == d, "background dimensions do not match the stack");
  require(irf.wavelengths() == d.wavelengths, "IRF wavelength count does not match the cube");

  SurfaceSet out(d.rows, d.cols, d.wavelengths, d.bins, max_surfaces, irf);
  const double merge_gap = irf.fwhm();
  const std::size_t left_pad = irf.offset();
  const std::size_t right_pad = irf.length() - 1 - irf.offset();
  const std::size_t Q = stack.size();
  const std::size_t L = d.wavelengths;
  const std::size_t T = d.bins;

  parallel_for(0, d.pixels(), [&](std::size_t n) {
    auto runs = find_runs(map, n, merge_gap);
    if (runs.empty()) return;

    // Clean response per scale, and the lambda-weighted clean response for ranking.
    std::vector<std::vector<double>> clean(Q, std::vector<double>(L * T));
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < L; ++l) {
        std::span<double> dst(clean[q].data() + l * T, T);
        correlate(stack.scales[q].histogram(n, l), irf.response(l), irf.offset(), dst);
        for (std::size_t t = 0; t < T; ++t) dst[t] = std::max(dst[t] - background.at(n, l, t), 0.0);
      }
    }
    std::vector<double> weighted(L * T);
    filtered_response(stack, irf, stack.kernels, n, weighted);

    std::vector<double> energy(runs.size(), 0.0);
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (std::size_t t = runs[i].start; t <= runs[i].end; ++t)
        for (std::size_t l = 0; l < L; ++l)
          energy[i] += std::max(weighted[l * T + t] - background.at(n, l, t), 0.0);

    std::vector<std::size_t> order(runs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
    order.resize(std::min(order.size(), max_surfaces));
    std::sort(order.begin(), order.end());  // run index order is depth order

    for (std::size_t k = 0; k < order.size(); ++k) {
      const BinRun& run = runs[order[k]];
      std::size_t lo = run.start >= left_pad ? run.start - left_pad : 0;
      std::size_t hi = std::min(T - 1, run.end + right_pad);
      // Windows of neighbouring kept peaks split at the midpoint of their gap.
      if (k > 0) {
        const BinRun& prev = runs[order[k - 1]];
        lo = std::max(lo, (prev.end + run.start) / 2 + 1);
      }
      if (k + 1 < order.size()) {
        const BinRun& next = runs[order[k + 1]];
        hi = std::min(hi, (run.end + next.start) / 2);
      }
      Surface& s = out[out.index(n / d.cols, n % d.cols, k)];
      s.present = true;
      s.run_start = run.start;
      s.run_end = run.end;
      s.window_start = lo;
      s.window_length = hi - lo + 1;
      s.energy = energy[order[k]];
      s.scales.assign(Q, std::vector<double>(L * s.window_length));
      for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t t = 0; t < s.window_length; ++t)
            s.scales[q][l * s.window_length + t] = clean[q][l * T + lo + t];
    }
  });
  return out;
}

long window_peak(std::span<const double> hist, std::size_t wavelengths, std::size_t window_start,
                 std::size_t window_length, const Irf& irf) {
  long best_d = static_cast<long>(window_start);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < window_length; ++i) {
    const long dep = static_cast<long>(window_start + i);
    double score = 0.0;
    for (std::size_t l = 0; l < wavelengths; ++l)
      for (std::size_t t = 0; t < window_length; ++t)
        score += hist[l * window_length + t] *
                 irf.at(l, static_cast<long>(window_start + t) - dep);
    if (score > best) {
      best = score;
      best_d = dep;
    }
  }
  return best_d;
}

SurfaceSet select_scales(SurfaceSet surfaces) {
  const Irf& irf = surfaces.irf();
  const std::size_t L = surfaces.wavelengths();
  parallel_for(0, surfaces.size(), [&](std::size_t idx) {
    Surface& s = surfaces[idx];
    if (!s.present) return;
    const std::size_t Q = s.scales.size();
    require(Q >= 2, "scale selection needs at least two scales");
    std::vector<double> total(L * s.window_length, 0.0);
    for (const auto& h : s.scales)
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += h[i];
    s.depth_global = window_peak(total, L, s.window_start, s.window_length, irf);

    std::size_t best_q = 1;
    long best_gap = std::numeric_limits<long>::max();
    long best_depth = s.depth_global;
    for (std::size_t q = 1; q < Q; ++q) {
      const long dq = window_peak(s.scales[q], L, s.window_start, s.window_length, irf);
      const long gap = std::abs(dq - s.depth_global);
      if (gap < best_gap) {
        best_gap = gap;
        best_q = q;
        best_depth = dq;
      }
    }
    s.selected_scale = best_q;
    s.depth = best_depth;
    s.clean = s.scales[best_q];
  });
  return surfaces;
}

}  // namespace lidarsurf
