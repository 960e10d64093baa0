#pragma once

#include <filesystem>
#include <iosfwd>

#include "lidarsurf/cube.hpp"

namespace lidarsurf {

// Binary cube layout, little-endian:
//   char[4]  magic "LSHC"
//   uint32   version (1)
//   uint32   rows, cols, wavelengths, bins
//   float64  bin_width in seconds
//   uint32   counts[rows*cols*wavelengths*bins], row-major (row, col, wavelength, bin)
inline constexpr char kCubeMagic[4] = {'L', 'S', 'H', 'C'};
inline constexpr std::uint32_t kCubeVersion = 1;

void write_cube(const HistogramCube& cube, std::ostream& out);
HistogramCube read_cube(std::istream& in);

void store_cube(const HistogramCube& cube, const std::filesystem::path& path);

// Accepts the binary format or the sparse-event text format (detected by magic).
HistogramCube load_cube(const std::filesystem::path& path);

// Sparse-event text: one `row col wavelength bin count` record per line, `#`
// starts a comment. A `# dims rows cols wavelengths bins [bin_width]` comment
// fixes the shape; without it the shape is the max index + 1 on each axis.
// Repeated keys accumulate.
HistogramCube read_sparse_events(std::istream& in);
void write_sparse_events(const HistogramCube& cube, std::ostream& out);

}  // namespace lidarsurf
