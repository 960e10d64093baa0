#include "lidarsurf/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "lidarsurf/error.hpp"

namespace lidarsurf {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("bad ") + what + " value '" + s + "'");
  }
}

long to_long(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("bad ") + what + " value '" + s + "'");
  }
}

std::size_t to_index(const std::string& s, const char* what) {
  const long v = to_long(s, what);
  if (v < 0) throw FormatError(std::string("negative ") + what);
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string format_hash(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_points_csv(const PointCloud& cloud, std::ostream& out, std::uint64_t config_hash) {
  out << "# config_hash " << format_hash(config_hash) << "\n";
  out << std::setprecision(17);
  out << "# cloud " << cloud.rows << ' ' << cloud.cols << ' ' << cloud.wavelengths << ' '
      << cloud.bins << ' ' << cloud.bin_width << "\n";
  out << "row,col,slot,depth,label,h";
  for (std::size_t l = 0; l < cloud.wavelengths; ++l) out << ",I_" << l;
  out << "\n";
  for (const CloudPoint& p : cloud.points) {
    out << p.row << ',' << p.col << ',' << p.slot << ',' << p.depth << ',' << p.label << ','
        << p.gain;
    for (double v : p.intensity) out << ',' << v;
    out << "\n";
  }
  if (!out) throw FormatError("failed writing point table");
}

PointCloud read_points_csv(std::istream& in, std::uint64_t* config_hash) {
  PointCloud cloud;
  bool have_geometry = false, have_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "config_hash") {
        std::string hex;
        ls >> hex;
        if (config_hash) {
          try {
            *config_hash = std::stoull(hex, nullptr, 16);
          } catch (const std::exception&) {
            throw FormatError("bad config hash '" + hex + "'");
          }
        }
      } else if (key == "cloud") {
        if (!(ls >> cloud.rows >> cloud.cols >> cloud.wavelengths >> cloud.bins >> cloud.bin_width))
          throw FormatError("malformed cloud geometry line");
        have_geometry = true;
      }
      continue;
    }
    if (!have_header) {
      if (!have_geometry) throw FormatError("point table lacks a '# cloud' geometry line");
      if (split(line, ',').size() != 6 + cloud.wavelengths)
        throw FormatError("point table header does not match the wavelength count");
      have_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6 + cloud.wavelengths) throw FormatError("point row has the wrong field count");
    CloudPoint p;
    p.row = to_index(f[0], "row");
    p.col = to_index(f[1], "col");
    p.slot = to_index(f[2], "slot");
    p.depth = to_double(f[3], "depth");
    p.label = to_long(f[4], "label");
    p.gain = to_double(f[5], "h");
    for (std::size_t l = 0; l < cloud.wavelengths; ++l)
      p.intensity.push_back(to_double(f[6 + l], "intensity"));
    cloud.points.push_back(std::move(p));
  }
  if (!have_header) throw FormatError("point table has no header");
  try {
    cloud.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid point table: ") + e.what());
  }
  return cloud;
}

void store_points_csv(const PointCloud& cloud, const std::filesystem::path& path,
                      std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_points_csv(cloud, out, config_hash);
}

PointCloud load_points_csv(const std::filesystem::path& path, std::uint64_t* config_hash) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_points_csv(in, config_hash);
}

void write_points_ply(const PointCloud& cloud, std::ostream& out, std::uint64_t config_hash) {
  out << "ply\nformat ascii 1.0\n";
  out << "comment config_hash " << format_hash(config_hash) << "\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  for (std::size_t l = 0; l < cloud.wavelengths; ++l) out << "property float intensity_" << l << "\n";
  out << "property int label\nproperty float h\nend_header\n";
  out << std::setprecision(9);
  for (const CloudPoint& p : cloud.points) {
    out << p.col << ' ' << p.row << ' ' << p.depth;
    for (double v : p.intensity) out << ' ' << v;
    out << ' ' << p.label << ' ' << p.gain << "\n";
  }
  if (!out) throw FormatError("failed writing PLY");
}

void store_points_ply(const PointCloud& cloud, const std::filesystem::path& path,
                      std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_points_ply(cloud, out, config_hash);
}

void write_reports_csv(const std::vector<EvalReport>& reports, double bin_width, std::ostream& out,
                       std::uint64_t config_hash) {
  out << "# config_hash " << format_hash(config_hash) << "\n";
  out << "tau_bins,tau_mm,f_true,f_false,iae,dae_bins,accuracy,matched,gt_count,est_count\n";
  out << std::setprecision(17);
  for (const EvalReport& r : reports) {
    out << r.tau << ',';
    if (bin_width > 0.0) out << bins_to_mm(r.tau, bin_width);
    out << ',' << r.f_true << ',' << r.f_false << ',' << r.iae << ',' << r.dae << ',';
    if (r.accuracy) out << *r.accuracy;
    out << ',' << r.matched << ',' << r.gt_count << ',' << r.est_count << "\n";
  }
}

std::string format_reports_json(const std::vector<EvalReport>& reports, double bin_width,
                                std::uint64_t config_hash) {
  nlohmann::json doc;
  doc["config_hash"] = format_hash(config_hash);
  doc["bin_width"] = bin_width;
  doc["reports"] = nlohmann::json::array();
  for (const EvalReport& r : reports) {
    nlohmann::json j;
    j["tau_bins"] = r.tau;
    j["tau_mm"] = bin_width > 0.0 ? nlohmann::json(bins_to_mm(r.tau, bin_width)) : nlohmann::json();
    j["f_true"] = r.f_true;
    j["f_false"] = r.f_false;
    j["iae"] = r.iae;
    j["dae_bins"] = r.dae;
    j["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json();
    j["matched"] = r.matched;
    j["gt_count"] = r.gt_count;
    j["est_count"] = r.est_count;
    doc["reports"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

}  // namespace lidarsurf
