#include "lidarsurf/detection_io.hpp"

#include <fstream>
#include <limits>
#include <string>

#include "lidarsurf/binary.hpp"

namespace lidarsurf {

namespace {

constexpr std::uint32_t kVersion = 1;

std::uint32_t u32(std::size_t v) {
  require(v <= std::numeric_limits<std::uint32_t>::max(), "value exceeds uint32 range");
  return static_cast<std::uint32_t>(v);
}

void check_version(std::istream& in, const char* what) {
  const auto version = binary::get<std::uint32_t>(in, "version");
  if (version != kVersion)
    throw FormatError(std::string("unsupported ") + what + " version " + std::to_string(version));
}

void expect_end(std::istream& in, const char* what) {
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(std::string("trailing bytes after ") + what);
}

}  // namespace

void write_detection_map(const DetectionMap& map, std::ostream& out, std::uint64_t config_hash) {
  binary::put_magic(out, kMapMagic);
  binary::put<std::uint32_t>(out, kVersion);
  binary::put<std::uint32_t>(out, u32(map.rows));
  binary::put<std::uint32_t>(out, u32(map.cols));
  binary::put<std::uint32_t>(out, u32(map.bins));
  binary::put<std::uint64_t>(out, config_hash);
  for (std::size_t n = 0; n < map.pixels(); ++n) {
    const auto runs = find_runs(map, n, 0.0);
    binary::put<std::uint32_t>(out, u32(runs.size()));
    for (const auto& run : runs) {
      binary::put<std::uint32_t>(out, u32(run.start));
      binary::put<std::uint32_t>(out, u32(run.end - run.start + 1));
    }
  }
  if (!out) throw FormatError("failed writing detection map");
}

DetectionMap read_detection_map(std::istream& in, std::uint64_t* config_hash) {
  binary::expect_magic(in, kMapMagic, "detection map");
  check_version(in, "detection map");
  const std::size_t rows = binary::get<std::uint32_t>(in, "rows");
  const std::size_t cols = binary::get<std::uint32_t>(in, "cols");
  const std::size_t bins = binary::get<std::uint32_t>(in, "bins");
  const auto hash = binary::get<std::uint64_t>(in, "config hash");
  if (config_hash) *config_hash = hash;
  if (rows == 0 || cols == 0 || bins == 0) throw FormatError("detection map has an empty dimension");
  DetectionMap map = empty_map(rows, cols, bins);
  for (std::size_t n = 0; n < rows * cols; ++n) {
    const auto runs = binary::get<std::uint32_t>(in, "run count");
    for (std::uint32_t i = 0; i < runs; ++i) {
      const std::size_t start = binary::get<std::uint32_t>(in, "run start");
      const std::size_t length = binary::get<std::uint32_t>(in, "run length");
      if (length == 0 || start + length > bins) throw FormatError("detection run out of range");
      for (std::size_t t = start; t < start + length; ++t) map.values[n * bins + t] = 1;
    }
  }
  expect_end(in, "detection map");
  return map;
}

void store_detection_map(const DetectionMap& map, const std::filesystem::path& path,
                         std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_detection_map(map, out, config_hash);
}

DetectionMap load_detection_map(const std::filesystem::path& path, std::uint64_t* config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_detection_map(in, config_hash);
}

void write_surfaces(const SurfaceSet& surfaces, std::ostream& out, std::uint64_t config_hash) {
  const Irf& irf = surfaces.irf();
  binary::put_magic(out, kSurfaceMagic);
  binary::put<std::uint32_t>(out, kVersion);
  for (std::size_t v : {surfaces.rows(), surfaces.cols(), surfaces.wavelengths(), surfaces.bins(),
                        surfaces.max_surfaces()})
    binary::put<std::uint32_t>(out, u32(v));
  binary::put<std::uint64_t>(out, config_hash);
  binary::put<std::uint32_t>(out, u32(irf.length()));
  binary::put<std::uint32_t>(out, u32(irf.offset()));
  for (std::size_t l = 0; l < irf.wavelengths(); ++l)
    for (double v : irf.response(l)) binary::put<double>(out, v);

  binary::put<std::uint32_t>(out, u32(surfaces.present_count()));
  for (const Surface& s : surfaces.surfaces()) {
    if (!s.present) continue;
    require(s.clean.size() == surfaces.wavelengths() * s.window_length,
            "surface has no selected-scale histogram; run scale selection first");
    for (std::size_t v : {s.row, s.col, s.slot, s.run_start, s.run_end, s.window_start,
                          s.window_length})
      binary::put<std::uint32_t>(out, u32(v));
    binary::put<std::int64_t>(out, s.depth_global);
    binary::put<std::int64_t>(out, s.depth);
    binary::put<std::uint32_t>(out, u32(s.selected_scale));
    binary::put<double>(out, s.energy);
    for (double v : s.clean) binary::put<double>(out, v);
  }
  if (!out) throw FormatError("failed writing surface set");
}

SurfaceSet read_surfaces(std::istream& in, std::uint64_t* config_hash) {
  binary::expect_magic(in, kSurfaceMagic, "surface set");
  check_version(in, "surface set");
  const std::size_t rows = binary::get<std::uint32_t>(in, "rows");
  const std::size_t cols = binary::get<std::uint32_t>(in, "cols");
  const std::size_t wavelengths = binary::get<std::uint32_t>(in, "wavelengths");
  const std::size_t bins = binary::get<std::uint32_t>(in, "bins");
  const std::size_t max_surfaces = binary::get<std::uint32_t>(in, "max_surfaces");
  const auto hash = binary::get<std::uint64_t>(in, "config hash");
  if (config_hash) *config_hash = hash;
  if (rows == 0 || cols == 0 || wavelengths == 0 || bins == 0 || max_surfaces == 0)
    throw FormatError("surface set has an empty dimension");

  const std::size_t length = binary::get<std::uint32_t>(in, "IRF length");
  const std::size_t offset = binary::get<std::uint32_t>(in, "IRF offset");
  if (length == 0 || length > bins) throw FormatError("surface set IRF length out of range");
  std::vector<std::vector<double>> responses(wavelengths, std::vector<double>(length));
  for (auto& g : responses)
    for (double& v : g) v = binary::get<double>(in, "IRF response");

  Irf irf;
  try {
    irf = Irf(std::move(responses), offset);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("surface set IRF invalid: ") + e.what());
  }
  SurfaceSet set(rows, cols, wavelengths, bins, max_surfaces, std::move(irf));

  const std::size_t present = binary::get<std::uint32_t>(in, "present count");
  if (present > set.size()) throw FormatError("surface count exceeds the slot count");
  for (std::size_t i = 0; i < present; ++i) {
    const std::size_t row = binary::get<std::uint32_t>(in, "row");
    const std::size_t col = binary::get<std::uint32_t>(in, "col");
    const std::size_t slot = binary::get<std::uint32_t>(in, "slot");
    if (row >= rows || col >= cols || slot >= max_surfaces)
      throw FormatError("surface index out of range");
    Surface& s = set[set.index(row, col, slot)];
    if (s.present) throw FormatError("duplicate surface slot");
    s.present = true;
    s.run_start = binary::get<std::uint32_t>(in, "run start");
    s.run_end = binary::get<std::uint32_t>(in, "run end");
    s.window_start = binary::get<std::uint32_t>(in, "window start");
    s.window_length = binary::get<std::uint32_t>(in, "window length");
    if (s.window_length == 0 || s.window_start + s.window_length > bins)
      throw FormatError("surface window out of range");
    s.depth_global = binary::get<std::int64_t>(in, "global depth");
    s.depth = binary::get<std::int64_t>(in, "depth");
    s.selected_scale = binary::get<std::uint32_t>(in, "selected scale");
    s.energy = binary::get<double>(in, "energy");
    s.clean.resize(wavelengths * s.window_length);
    for (double& v : s.clean) {
      v = binary::get<double>(in, "clean histogram");
      if (!(v >= 0.0)) throw FormatError("clean histogram holds a negative or NaN value");
    }
  }
  expect_end(in, "surface set");
  return set;
}

void store_surfaces(const SurfaceSet& surfaces, const std::filesystem::path& path,
                    std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_surfaces(surfaces, out, config_hash);
}

SurfaceSet load_surfaces(const std::filesystem::path& path, std::uint64_t* config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_surfaces(in, config_hash);
}

}  // namespace lidarsurf
