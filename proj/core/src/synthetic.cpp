#include "lidarsurf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

std::vector<std::vector<double>> default_signatures(std::size_t classes,
                                                    std::size_t wavelengths) {
  require(classes >= 1 && wavelengths >= 1, "signatures need >= 1 class and wavelength");
  const double span = static_cast<double>(wavelengths - 1);
  const double width =
      std::max(static_cast<double>(wavelengths) / (2.0 * static_cast<double>(classes)), 0.6);
  std::vector<std::vector<double>> out(classes, std::vector<double>(wavelengths));
  for (std::size_t k = 0; k < classes; ++k) {
    const double center = classes > 1 ? span * double(k) / double(classes - 1) : 0.0;
    for (std::size_t l = 0; l < wavelengths; ++l) {
      const double d = double(l) - center;
      out[k][l] = 0.3 + 0.7 * std::exp(-0.5 * d * d / (width * width));
    }
  }
  return out;
}

namespace {

struct Region {
  int label;
  double depth;  // fraction of the histogram range
};

// Layer geometry on normalized coordinates x, y in [0, 1].
Region front_layer(double x, double y) {
  if (x >= 0.12 && x <= 0.45 && y >= 0.15 && y <= 0.50) return {1, 0.12 + 0.06 * x + 0.03 * y};
  if (x >= 0.55 && x <= 0.90 && y >= 0.55 && y <= 0.88) return {2, 0.20 + 0.02 * x + 0.05 * y};
  return {0, 0.22 + 0.18 * x + 0.05 * y};
}

}  // namespace

GroundTruthScene make_layered_scene(const LayeredSceneOptions& options) {
  const CubeDims& dims = options.dims;
  require(dims.valid(), "scene dimensions must all be >= 1");
  require(options.layers == 1 || options.layers == 2, "layered scene supports 1 or 2 layers");
  const auto signatures = options.signatures.empty()
                              ? default_signatures(1, dims.wavelengths)
                              : options.signatures;
  for (const auto& m : signatures)
    require(m.size() == dims.wavelengths, "signature length must equal the wavelength count");
  require(dims.bins >= 16, "layered scene needs at least 16 bins");

  GroundTruthScene scene(dims, options.layers);
  const double bins = static_cast<double>(dims.bins);
  const std::size_t classes = signatures.size();

  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      const double x = dims.cols > 1 ? double(c) / double(dims.cols - 1) : 0.5;
      const double y = dims.rows > 1 ? double(r) / double(dims.rows - 1) : 0.5;
      auto& pixel = scene.pixel(r, c);

      auto add = [&](Region region, double offset, double phase) {
        const int label = region.label % static_cast<int>(classes);
        // Shading varies along y only, across the dominant depth gradient in x.
        const double shade = 0.8 + 0.2 * std::cos(2.0 * std::numbers::pi * (0.8 * y + phase));
        SceneSurface s;
        s.depth = std::clamp(static_cast<long>(std::lround((region.depth + offset) * bins)), 0L,
                             static_cast<long>(dims.bins) - 1);
        s.label = label;
        s.reflectivity.resize(dims.wavelengths);
        for (std::size_t l = 0; l < dims.wavelengths; ++l)
          s.reflectivity[l] = signatures[std::size_t(label)][l] * shade;
        pixel.push_back(std::move(s));
      };

      add(front_layer(x, y), 0.0, 0.0);
      if (options.layers == 2) {
        // Mirrored copy of the front layer, shifted back; labels rotated.
        Region back = front_layer(1.0 - x, y);
        back.label += 1;
        add(back, 0.48, 0.35);
      }
    }
  }
  scene.validate();
  return scene;
}

}  // namespace lidarsurf
