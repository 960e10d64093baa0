#pragma once

#include <cstddef>
#include <vector>

#include "lidarsurf/scene.hpp"

namespace lidarsurf {

// Distinct smooth spectral shapes, one row per class, values in (0, 1].
std::vector<std::vector<double>> default_signatures(std::size_t classes,
                                                    std::size_t wavelengths);

struct LayeredSceneOptions {
  CubeDims dims{64, 64, 1, 128};
  std::size_t layers = 2;  // 1 or 2 surfaces per pixel
  // Rows of per-class spectral signatures; labels cycle through them.
  std::vector<std::vector<double>> signatures;
};

// Piecewise-planar cluttered scene: a tilted backdrop with two tilted blocks,
// each region assigned a class. The optional second layer is a mirrored copy
// pushed back in depth, so every pixel then carries two returns. Reflectivity is
// the class signature times a smooth shading factor.
GroundTruthScene make_layered_scene(const LayeredSceneOptions& options);

}  // namespace lidarsurf
