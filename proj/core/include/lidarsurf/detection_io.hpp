#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "lidarsurf/saliency.hpp"
#include "lidarsurf/surfaces.hpp"

namespace lidarsurf {

// Run-length encoded detection map, little-endian:
//   char[4] "LSDM", uint32 version (1), uint32 rows, cols, bins, uint64 config hash
//   per pixel (row-major): uint32 run_count, then run_count x (uint32 start, uint32 length)
inline constexpr char kMapMagic[4] = {'L', 'S', 'D', 'M'};

void write_detection_map(const DetectionMap& map, std::ostream& out, std::uint64_t config_hash = 0);
DetectionMap read_detection_map(std::istream& in, std::uint64_t* config_hash = nullptr);
void store_detection_map(const DetectionMap& map, const std::filesystem::path& path,
                         std::uint64_t config_hash = 0);
DetectionMap load_detection_map(const std::filesystem::path& path,
                                std::uint64_t* config_hash = nullptr);

// Surface set after scale selection, little-endian:
//   char[4] "LSSF", uint32 version (1), uint32 rows, cols, wavelengths, bins,
//   max_surfaces, uint64 config hash
//   IRF: uint32 length, uint32 offset, float64 response[wavelengths][length]
//   uint32 present_count, then per present surface:
//     uint32 row, col, slot, run_start, run_end, window_start, window_length
//     int64 depth_global, depth; uint32 selected_scale; float64 energy
//     float64 clean[wavelengths][window_length]
// Only the selected-scale histogram is stored.
inline constexpr char kSurfaceMagic[4] = {'L', 'S', 'S', 'F'};

void write_surfaces(const SurfaceSet& surfaces, std::ostream& out, std::uint64_t config_hash = 0);
SurfaceSet read_surfaces(std::istream& in, std::uint64_t* config_hash = nullptr);
void store_surfaces(const SurfaceSet& surfaces, const std::filesystem::path& path,
                    std::uint64_t config_hash = 0);
SurfaceSet load_surfaces(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

}  // namespace lidarsurf
