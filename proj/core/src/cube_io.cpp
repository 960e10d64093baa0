#include "lidarsurf/cube_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "lidarsurf/binary.hpp"

namespace lidarsurf {

void write_cube(const HistogramCube& cube, std::ostream& out) {
  const CubeDims& d = cube.dims();
  binary::put_magic(out, kCubeMagic);
  binary::put<std::uint32_t>(out, kCubeVersion);
  for (std::size_t v : {d.rows, d.cols, d.wavelengths, d.bins}) {
    require(v <= std::numeric_limits<std::uint32_t>::max(), "cube dimension exceeds uint32");
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  binary::put<double>(out, cube.bin_width());
  for (std::uint32_t c : cube.data()) binary::put<std::uint32_t>(out, c);
  if (!out) throw FormatError("failed writing cube");
}

HistogramCube read_cube(std::istream& in) {
  binary::expect_magic(in, kCubeMagic, "histogram cube");
  const auto version = binary::get<std::uint32_t>(in, "version");
  if (version != kCubeVersion)
    throw FormatError("unsupported cube version " + std::to_string(version));
  CubeDims d;
  d.rows = binary::get<std::uint32_t>(in, "rows");
  d.cols = binary::get<std::uint32_t>(in, "cols");
  d.wavelengths = binary::get<std::uint32_t>(in, "wavelengths");
  d.bins = binary::get<std::uint32_t>(in, "bins");
  const double bin_width = binary::get<double>(in, "bin_width");
  if (!d.valid()) throw FormatError("cube header declares an empty dimension");

  // Check the payload length before allocating.
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    const auto available = static_cast<unsigned long long>(end - here);
    const unsigned long long expected = 4ULL * d.rows * d.cols * d.wavelengths * d.bins;
    if (available != expected)
      throw FormatError("cube payload is " + std::to_string(available) + " bytes, header declares " +
                        std::to_string(expected));
  }

  std::vector<std::uint32_t> counts(d.voxels());
  in.read(reinterpret_cast<char*>(counts.data()),
          static_cast<std::streamsize>(counts.size() * sizeof(std::uint32_t)));
  if (in.gcount() != static_cast<std::streamsize>(counts.size() * sizeof(std::uint32_t)))
    throw FormatError("truncated cube payload");
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& c : counts)
      c = (c >> 24) | ((c >> 8) & 0xff00u) | ((c << 8) & 0xff0000u) | (c << 24);
  }
  return HistogramCube(d, std::move(counts), bin_width);
}

void store_cube(const HistogramCube& cube, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_cube(cube, out);
}

HistogramCube load_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool is_binary = in.gcount() == 4 && std::memcmp(magic, kCubeMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  if (is_binary) return read_cube(in);
  return read_sparse_events(in);
}

HistogramCube read_sparse_events(std::istream& in) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::uint64_t> events;
  CubeDims declared;
  bool have_dims = false;
  double bin_width = 0.0;
  CubeDims extent{0, 0, 0, 0};

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      std::string word;
      if (comment >> word && word == "dims") {
        if (!(comment >> declared.rows >> declared.cols >> declared.wavelengths >> declared.bins))
          throw FormatError("malformed dims directive on line " + std::to_string(line_no));
        comment >> bin_width;
        have_dims = true;
      }
      line.erase(hash);
    }
    std::istringstream fields(line);
    long long row, col, wl, bin, count;
    if (!(fields >> row)) continue;  // blank line
    if (!(fields >> col >> wl >> bin >> count) || row < 0 || col < 0 || wl < 0 || bin < 0 ||
        count < 0)
      throw FormatError("malformed event record on line " + std::to_string(line_no));
    std::string extra;
    if (fields >> extra) throw FormatError("trailing fields on line " + std::to_string(line_no));
    const Key key{std::size_t(row), std::size_t(col), std::size_t(wl), std::size_t(bin)};
    events[key] += static_cast<std::uint64_t>(count);
    extent.rows = std::max(extent.rows, std::size_t(row) + 1);
    extent.cols = std::max(extent.cols, std::size_t(col) + 1);
    extent.wavelengths = std::max(extent.wavelengths, std::size_t(wl) + 1);
    extent.bins = std::max(extent.bins, std::size_t(bin) + 1);
  }

  const CubeDims dims = have_dims ? declared : extent;
  if (!dims.valid()) throw FormatError("sparse event file has no events and no dims directive");
  if (extent.rows > dims.rows || extent.cols > dims.cols ||
      extent.wavelengths > dims.wavelengths || extent.bins > dims.bins)
    throw FormatError("sparse event index outside the declared dims");

  HistogramCube cube(dims, bin_width);
  for (const auto& [key, count] : events) {
    const auto [r, c, l, t] = key;
    if (count > std::numeric_limits<std::uint32_t>::max())
      throw FormatError("accumulated count overflows uint32");
    cube(r, c, l, t) = static_cast<std::uint32_t>(count);
  }
  return cube;
}

void write_sparse_events(const HistogramCube& cube, std::ostream& out) {
  const CubeDims& d = cube.dims();
  out.precision(17);
  out << "# dims " << d.rows << ' ' << d.cols << ' ' << d.wavelengths << ' ' << d.bins << ' '
      << cube.bin_width() << '\n';
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols; ++c)
      for (std::size_t l = 0; l < d.wavelengths; ++l)
        for (std::size_t t = 0; t < d.bins; ++t)
          if (const auto v = cube(r, c, l, t); v != 0)
            out << r << ' ' << c << ' ' << l << ' ' << t << ' ' << v << '\n';
}

}  // namespace lidarsurf
