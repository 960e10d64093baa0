#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lidarsurf/metrics.hpp"

namespace lidarsurf {

// Flat point table, comma separated:
//   # config_hash <16 hex digits>
//   # cloud <rows> <cols> <wavelengths> <bins> <bin_width>
//   row,col,slot,depth,label,h,I_0,...,I_{L-1}
//   one line per point
void write_points_csv(const PointCloud& cloud, std::ostream& out, std::uint64_t config_hash = 0);
PointCloud read_points_csv(std::istream& in, std::uint64_t* config_hash = nullptr);
void store_points_csv(const PointCloud& cloud, const std::filesystem::path& path,
                      std::uint64_t config_hash = 0);
PointCloud load_points_csv(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

// ASCII PLY with vertex properties x (col), y (row), z (depth in bins),
// intensity_0..intensity_{L-1}, label, h. The config hash is a PLY comment.
void write_points_ply(const PointCloud& cloud, std::ostream& out, std::uint64_t config_hash = 0);
void store_points_ply(const PointCloud& cloud, const std::filesystem::path& path,
                      std::uint64_t config_hash = 0);

// One row per report: tau_bins,tau_mm,f_true,f_false,iae,dae_bins,accuracy,matched,gt_count,est_count
// tau_mm is empty without a bin width and accuracy is empty without labels.
void write_reports_csv(const std::vector<EvalReport>& reports, double bin_width, std::ostream& out,
                       std::uint64_t config_hash = 0);
std::string format_reports_json(const std::vector<EvalReport>& reports, double bin_width,
                                std::uint64_t config_hash = 0);

std::string format_hash(std::uint64_t hash);

}  // namespace lidarsurf
