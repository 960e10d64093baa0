#include "lidarsurf/bayes_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "lidarsurf/error.hpp"

namespace lidarsurf {

namespace {

using nlohmann::json;

std::vector<double> matrix_field(const json& doc, const char* key, std::size_t K, std::size_t L,
                                 double fallback) {
  std::vector<double> out(K * L, fallback);
  if (!doc.contains(key)) return out;
  const json& v = doc.at(key);
  if (v.is_number()) {
    std::fill(out.begin(), out.end(), v.get<double>());
    return out;
  }
  if (!v.is_array() || v.size() != K) throw FormatError(std::string("library field '") + key + "' must be a number or K x L matrix");
  for (std::size_t k = 0; k < K; ++k) {
    if (!v[k].is_array() || v[k].size() != L)
      throw FormatError(std::string("library field '") + key + "' row has the wrong length");
    for (std::size_t l = 0; l < L; ++l) out[k * L + l] = v[k][l].get<double>();
  }
  return out;
}

json matrix_json(const std::vector<double>& v, std::size_t K, std::size_t L) {
  json rows = json::array();
  for (std::size_t k = 0; k < K; ++k)
    rows.push_back(std::vector<double>(v.begin() + k * L, v.begin() + (k + 1) * L));
  return rows;
}

}  // namespace

SpectralLibrary parse_library(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("library is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("signatures") || !doc["signatures"].is_array() ||
        doc["signatures"].empty() || !doc["signatures"][0].is_array())
      throw FormatError("library needs a non-empty 'signatures' matrix");
    const std::size_t K = doc["signatures"].size();
    const std::size_t L = doc["signatures"][0].size();
    SpectralLibrary lib;
    lib.classes = K;
    lib.wavelengths = L;
    lib.signatures = matrix_field(doc, "signatures", K, L, 0.0);
    lib.alpha = matrix_field(doc, "alpha", K, L, SpectralLibrary::kDefaultAlpha);
    lib.nu = matrix_field(doc, "nu", K, L, SpectralLibrary::kDefaultNu);
    lib.eps.resize(K * L);
    for (std::size_t i = 0; i < K * L; ++i)
      lib.eps[i] = (lib.nu[i] + 1.0) * lib.signatures[i] / lib.alpha[i];
    if (doc.contains("eps")) lib.eps = matrix_field(doc, "eps", K, L, 0.0);
    lib.validate();
    return lib;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed library: ") + e.what());
  }
}

std::string format_library(const SpectralLibrary& library) {
  const std::size_t K = library.classes, L = library.wavelengths;
  json doc;
  doc["signatures"] = matrix_json(library.signatures, K, L);
  doc["alpha"] = matrix_json(library.alpha, K, L);
  doc["nu"] = matrix_json(library.nu, K, L);
  doc["eps"] = matrix_json(library.eps, K, L);
  return doc.dump(2) + "\n";
}

SpectralLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_library(ss.str());
}

void store_library(const SpectralLibrary& library, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << format_library(library);
}

void write_trace(const CdaResult& result, std::ostream& out, std::uint64_t config_hash) {
  out << "# config_hash " << std::hex << std::setw(16) << std::setfill('0') << config_hash
      << std::dec << std::setfill(' ') << "\n";
  out << "# converged " << (result.converged ? 1 : 0) << "\n";
  out << "sweep,rms_r,rms_h,flip_rate,log_posterior\n";
  out << std::setprecision(17);
  for (const TraceRow& row : result.trace)
    out << row.sweep << ',' << row.rms_r << ',' << row.rms_h << ',' << row.flip_rate << ','
        << row.log_posterior << "\n";
}

void store_trace(const CdaResult& result, const std::filesystem::path& path,
                 std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_trace(result, out, config_hash);
}

std::vector<TraceRow> read_trace(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "sweep,rms_r,rms_h,flip_rate,log_posterior") throw FormatError("unexpected trace header");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    TraceRow row;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ls >> row.sweep >> c1 >> row.rms_r >> c2 >> row.rms_h >> c3 >> row.flip_rate >> c4 >>
          row.log_posterior) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
      throw FormatError("malformed trace row: " + line);
    rows.push_back(row);
  }
  if (!header) throw FormatError("trace has no header");
  return rows;
}

}  // namespace lidarsurf
