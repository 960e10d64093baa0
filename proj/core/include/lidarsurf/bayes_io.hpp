#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lidarsurf/bayes.hpp"

namespace lidarsurf {

// Spectral library as JSON:
//   {"signatures": [[m_00, m_01, ...], ...],   K rows of L values
//    "alpha": 100, "nu": 10, "eps": ...}      scalars or K x L matrices
// eps defaults to (nu + 1) m / alpha; alpha and nu default to the library defaults.
SpectralLibrary parse_library(const std::string& json_text);
std::string format_library(const SpectralLibrary& library);
SpectralLibrary load_library(const std::filesystem::path& path);
void store_library(const SpectralLibrary& library, const std::filesystem::path& path);

// Convergence trace, comma separated with a header row. Leading lines starting
// with '#' are comments (the config hash goes there).
void write_trace(const CdaResult& result, std::ostream& out, std::uint64_t config_hash = 0);
void store_trace(const CdaResult& result, const std::filesystem::path& path,
                 std::uint64_t config_hash = 0);
std::vector<TraceRow> read_trace(std::istream& in);

}  // namespace lidarsurf
